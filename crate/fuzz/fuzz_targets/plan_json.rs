#![no_main]

use libfuzzer_sys::fuzz_target;
use recon::PuncturePlan;

fuzz_target!(|data: &[u8]| {
    let Some((&n, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    let n = usize::from(n) * 8;
    if let Ok(plan) = PuncturePlan::from_json(text, n) {
        assert_eq!(PuncturePlan::from_json(&plan.to_json(), n).expect("own output parses"), plan);
    }
});
