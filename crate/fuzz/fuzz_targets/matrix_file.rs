#![no_main]

use libfuzzer_sys::fuzz_target;
use simlin::format::parse_matrix_file;
use simlin::scalars::{Arith, BigComplex};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for n in 1..=3 {
        let _ = parse_matrix_file(&Arith::exact(), text, n);
        let _ = parse_matrix_file(&Arith::<BigComplex>::float(128).unwrap(), text, n);
    }
});
