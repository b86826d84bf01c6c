#![no_main]

use libfuzzer_sys::fuzz_target;
use recon::harness::sweep::SweepConfig;

fuzz_target!(|text: &str| {
    if let Ok(cfg) = SweepConfig::from_json(text) {
        let again = SweepConfig::from_json(&serde_json::to_string(&cfg).unwrap()).expect("own output parses");
        assert_eq!(again, cfg);
    }
});
