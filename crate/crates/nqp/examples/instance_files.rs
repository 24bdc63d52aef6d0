//! The instance file format: serialize a generated instance, embed a binary
//! one with its certificate as comments, and parse both back.
//!
//! ```bash
//! cargo run --release --example instance_files
//! ```

use nqp::fileio::{parse_instance, serialize_instance, Instance};
use nqp::instance::QpInstance;
use nqp::level_set::LevelSet;
use nqp::reduction::reduce_to_level_set;

fn main() -> nqp::Result<()> {
    let inst = QpInstance::random_psd(3, LevelSet::new(vec![-2, 0, 1])?, 5, 3)?;
    let text = serialize_instance(&inst, None);
    println!("generated instance file:\n\n{text}");

    let parsed = parse_instance(&text)?;
    assert_eq!(parsed, Instance::Int(inst));
    println!("round trip is bit-exact\n");

    let binary = QpInstance::from_rows(vec![vec![2]], vec![-3], LevelSet::binary(), true)?;
    let (reduced, certificate) =
        reduce_to_level_set(&binary, &LevelSet::new(vec![0, 1, 2])?, false)?;
    let with_certificate = serialize_instance(&reduced, Some(&certificate));
    println!("embedded instance with certificate comments:\n\n{with_certificate}");

    // comment lines are ignored on re-parse
    let Instance::Int(back) = parse_instance(&with_certificate)? else {
        unreachable!("domain is preserved");
    };
    assert_eq!(back, reduced);
    println!("certificate comments are ignored on re-parse; coefficients survive exactly");
    Ok(())
}
