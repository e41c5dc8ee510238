#![no_main]

use libfuzzer_sys::fuzz_target;
use shapdag::Rational;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(x) = text.parse::<Rational>() else { return };
    let printed = x.to_string();
    assert_eq!(printed.parse::<Rational>().expect("printed rationals parse"), x);
    let _ = x.to_decimal_string(12);
});
