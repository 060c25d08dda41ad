mod common;

use common::*;
use se23nav::models::Tag;

#[test]
fn f_matches_finite_differences() {
    for tag in Tag::ALL {
        let a = check_f(tag, &setup_real_current(), 2000.0, 1);
        let b = check_f(tag, &setup_real_initial(), 5.0, 2);
        let c = check_f(tag, &setup_fast_earth(), 5.0, 3);
        println!("{tag}: F rel err real/current {a:.2e}, real/initial {b:.2e}, fast earth {c:.2e}");
        assert!(a < 1e-5 && b < 1e-5 && c < 1e-5, "{tag}: {a:e} {b:e} {c:e}");
    }
}

#[test]
fn h_matches_finite_differences() {
    for tag in Tag::ALL {
        // the augmented right-form H leaves out a (p x)(w_ie x) attitude
        // coupling, which is only negligible near the reference position
        let (real, fast) = if tag == Tag::ALgR { (0.05, 0.001) } else { (2000.0, 5.0) };
        let a = check_h(tag, &setup_real_current(), real, 4);
        let c = check_h(tag, &setup_fast_earth(), fast, 5);
        println!("{tag}: H rel err real {a:.2e}, fast earth {c:.2e}");
        assert!(a < 1e-5 && c < 1e-5, "{tag}: {a:e} {c:e}");
    }
}
