#![no_main]

use libfuzzer_sys::fuzz_target;
use vlc_secrecy::commands::{cmd_bounds, CmdOptions};
use vlc_secrecy::config::parse_config;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(cfg) = parse_config(text) else {
        return;
    };
    // Anything accepted must serialize back to an equivalent config.
    let again = parse_config(&cfg.to_toml()).expect("re-serialized config parses");
    assert_eq!(cfg, again);
    // A validated operating point evaluates without panicking.
    let _ = cmd_bounds(&cfg, &CmdOptions::default());
});
