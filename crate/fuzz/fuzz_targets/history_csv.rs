#![no_main]

use libfuzzer_sys::fuzz_target;
use tdbie::marching::SolutionHistory;

fuzz_target!(|data: &[u8]| {
    if let Ok(h) = SolutionHistory::read_csv(data, 0.1) {
        let mut out = Vec::new();
        h.write_csv(&mut out).expect("writing to memory");
        let back = SolutionHistory::read_csv(out.as_slice(), 0.1).expect("own output parses");
        assert_eq!(back.steps(), h.steps());
    }
});
