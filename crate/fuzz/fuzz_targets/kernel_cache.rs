#![no_main]

use libfuzzer_sys::fuzz_target;
use tdbie::tdkernels::decode;

fuzz_target!(|data: &[u8]| {
    let Some((&count, payload)) = data.split_first() else {
        return;
    };
    if let Some(values) = decode(payload, count as usize) {
        assert_eq!(values.len(), count as usize);
    }
});
