#![no_main]

use libfuzzer_sys::fuzz_target;
use tdbie::geometry::{build_mesh, CustomCurve, Shape};

fuzz_target!(|data: &[u8]| {
    if let Ok(curve) = CustomCurve::from_csv_reader(data) {
        // accepted curves must mesh or fail cleanly
        let _ = build_mesh(&Shape::Custom(curve), 16);
    }
});
