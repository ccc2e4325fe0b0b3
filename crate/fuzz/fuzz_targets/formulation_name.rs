#![no_main]

use libfuzzer_sys::fuzz_target;
use tdbie::marching::Formulation;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(f) = text.parse::<Formulation>() {
            let again: Formulation = f.name().parse().expect("canonical names parse");
            assert_eq!(again.name(), f.name());
        }
    }
});
