#![no_main]

use libfuzzer_sys::fuzz_target;
use simlin::format::ProblemFile;
use simlin::scalars::Arith;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(p) = ProblemFile::parse(text) else { return };
    // Keep the dense work bounded; the parser itself already caps n and the
    // truncation degree.
    if p.n > 3 || p.truncation_degree > 8 {
        return;
    }
    let _ = p.build(&Arith::exact());
    if let Ok(ar) = p.float_arith(Some(128), None) {
        let _ = p.build(&ar);
    }
});
