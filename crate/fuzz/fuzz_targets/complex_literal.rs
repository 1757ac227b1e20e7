#![no_main]

use libfuzzer_sys::fuzz_target;
use simlin::format::{format_complex, parse_complex, split_complex};
use simlin::scalars::{Arith, BigComplex};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let _ = split_complex(s);
    let ex = Arith::exact();
    if let Ok(z) = parse_complex(&ex, s) {
        // Exact literals must survive a print/parse cycle.
        let back = parse_complex(&ex, &format_complex(&z)).expect("formatted literal parses");
        assert_eq!(back, z);
    }
    let fl = Arith::<BigComplex>::float(128).unwrap();
    let _ = parse_complex(&fl, s);
});
