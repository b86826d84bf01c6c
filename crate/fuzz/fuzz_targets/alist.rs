#![no_main]

use libfuzzer_sys::fuzz_target;
use recon::ldpc::alist::{from_alist, to_alist};

fuzz_target!(|text: &str| {
    if text.len() > 1 << 16 {
        return;
    }
    if let Ok(h) = from_alist(text) {
        let again = from_alist(&to_alist(&h)).expect("own output parses");
        assert!(again == h);
    }
});
