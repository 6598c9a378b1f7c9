use std::fmt::Write;

use super::{ComplexError, PolyhedralComplex};
use crate::scalar::Scalar;

/// Wavefront OBJ text of a complex using its node layout.
///
/// The layout is a picture, not an isometric realization: cap boxes are
/// drawn at their nominal height over the plane.
pub fn to_obj<T: Scalar>(c: &PolyhedralComplex<T>) -> Result<String, ComplexError> {
    if c.layout.len() != c.skeleton.node_count() {
        return Err(ComplexError::InvalidInput(
            "complex has no node layout to export".into(),
        ));
    }
    let mut s = String::new();
    s.push_str("# metrifill polyhedral complex\n");
    s.push_str("# visualization only: vertex positions are not an isometric realization\n");
    for p in &c.layout {
        let _ = writeln!(s, "v {} {} {}", p[0], p[1], p[2]);
    }
    for f in &c.faces {
        s.push('f');
        for v in &f.node_refs {
            let _ = write!(s, " {}", v + 1);
        }
        s.push('\n');
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::super::rectangle_complex;
    use super::*;

    #[test]
    fn square_obj() {
        let s = to_obj(&rectangle_complex(1.0, 1.0)).unwrap();
        assert!(s.contains("visualization only"));
        assert!(s.contains("f 1 2 3 4"));
        assert_eq!(s.lines().filter(|l| l.starts_with("v ")).count(), 4);
    }
}
