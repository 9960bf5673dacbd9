use std::sync::OnceLock;

use super::{parse_field, FieldDef, FieldError};

struct Entry {
    name: &'static str,
    dim: usize,
    time: bool,
    expr: &'static str,
    params: &'static [(&'static str, f64)],
    provenance: &'static str,
    helmholtz: bool,
}

const fn e(
    name: &'static str,
    dim: usize,
    time: bool,
    expr: &'static str,
    params: &'static [(&'static str, f64)],
    provenance: &'static str,
    helmholtz: bool,
) -> Entry {
    Entry { name, dim, time, expr, params, provenance, helmholtz }
}

const H_WAVE: &str = "(cos(y) - cos(x) + i*sin(y))*cos(t) + cos(y)*sin(t)";
const CUSP_WAVE: &str = "(x^3*cos(y) + (x - 3*x*y)*sin(y) + i*sin(y))*cos(t) + i*cos(y)*sin(t)";

static ENTRIES: &[Entry] = &[
    e("H2.regular", 2, false, "x + i*y", &[], "Theorem 2.1", false),
    e("H2.hyperbolic", 2, false, "x^2 - y^2 + i*y", &[], "Theorem 2.1", false),
    e("H2.elliptic", 2, false, "x^2 + y^2 + i*y", &[], "Theorem 2.1", false),
    e("H2.Ht", 2, false, "x^2 - y^2 + t + i*y", &[("t", 0.0)], "Section 2", false),
    e("H2.Et", 2, false, "x^2 + y^2 + t + i*y", &[("t", 0.0)], "Section 2", false),
    e("H2.fold3", 2, false, "x^2 + s*y^3 + i*y", &[("s", 1.0)], "Proposition 2.2", false),
    e("H2.fold4", 2, false, "x^2 + s*y^4 + i*y", &[("s", 1.0)], "Proposition 2.2", false),
    e("H2.fold5", 2, false, "x^2 + s*y^5 + i*y", &[("s", 1.0)], "Proposition 2.2", false),
    e("H2.cusp-normal", 2, false, "x^3 + x*y + i*(y + a)", &[("a", 0.0)], "Section 2", false),
    e("H2.cusp-family", 2, false, "x^3 + x*y + b + i*(y + a)", &[("a", 0.0), ("b", 0.0)], "Section 2", false),
    e("H2.helmholtz-hyperbolic", 2, false, "cos(y) - cos(x) + i*sin(y)", &[], "Proposition 3.1", true),
    e("H2.helmholtz-hyperbolic-wave", 2, true, H_WAVE, &[], "Proposition 3.1", true),
    e("H2.helmholtz-cusp", 2, false, "x^3*cos(y) + (x - 3*x*y)*sin(y) + i*sin(y)", &[], "Proposition 3.5", true),
    e("H2.helmholtz-cusp-wave", 2, true, CUSP_WAVE, &[], "Proposition 3.5", true),
    e("H2.helmholtz-hyperbolic-alt", 2, false, "x^2*cos(y) - y*sin(y) + i*sin(y)", &[], "Remark 3.2", true),
    e("H3.regular", 3, false, "x + i*y", &[], "Theorem 4.1", false),
    e("H3.DH", 3, false, "x^2 + y^2 - z^2 + i*z", &[], "Theorem 4.1", false),
    e("H3.DE", 3, false, "x^2 + y^2 + z^2 + i*z", &[], "Theorem 4.1", false),
    e("H3.I", 3, false, "x^2 - y^2 - z^2 + i*z", &[], "Theorem 4.1", false),
    e("H3.DHt", 3, false, "x^2 + y^2 - z^2 + t + i*z", &[("t", 0.0)], "Section 4", false),
    e("H3.DEt", 3, false, "x^2 + y^2 + z^2 + t + i*z", &[("t", 0.0)], "Section 4", false),
    e("H3.It", 3, false, "x^2 - y^2 - z^2 + t + i*z", &[("t", 0.0)], "Section 4", false),
    e("H3.cusp", 3, false, "x^3 + x*y + z^2 + i*y", &[], "Section 4", false),
    e(
        "H3.helmholtz-DHt",
        3,
        true,
        "(-cos(x) - cos(y) + 2*cos(z) + i*sin(z))*cos(t) + cos(z)*sin(t)",
        &[],
        "Proposition 4.2",
        true,
    ),
    e(
        "H3.helmholtz-It",
        3,
        true,
        "(-2*cos(x) + cos(y) + cos(z) + i*sin(z))*cos(t) + cos(z)*sin(t)",
        &[],
        "Proposition 4.2",
        true,
    ),
    e(
        "H3.helmholtz-cusp",
        3,
        false,
        "x^3*cos(y) + (x - 3*x*y)*sin(y) - cos(y) + cos(z) + i*sin(y)",
        &[],
        "Proposition 4.4",
        true,
    ),
];

fn build(en: &Entry) -> FieldDef {
    let expr = parse_field(en.expr).expect("catalog expression parses");
    let params = en.params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    let mut def = FieldDef::new(en.name, en.dim, en.time, expr, params, en.provenance).expect("catalog entry valid");
    if en.helmholtz {
        def.helmholtz_k = Some(1.0);
        if en.time {
            def.wave_c = Some(1.0);
        }
    }
    def
}

fn table() -> &'static [FieldDef] {
    static TABLE: OnceLock<Vec<FieldDef>> = OnceLock::new();
    TABLE.get_or_init(|| ENTRIES.iter().map(build).collect())
}

/// Every catalog entry, in a fixed order.
pub fn catalog() -> Vec<FieldDef> {
    table().to_vec()
}

pub fn catalog_get(name: &str) -> Result<FieldDef, FieldError> {
    table()
        .iter()
        .find(|d| d.name == name)
        .cloned()
        .ok_or_else(|| FieldError::UnknownField(name.to_string()))
}

/// Degenerate fold `x^2 + sign*y^m + i*y` for any exponent `m ≥ 2`.
pub fn fold_m(m: u32, sign: f64) -> Result<FieldDef, FieldError> {
    if m < 2 {
        return Err(FieldError::BadParameter(format!("fold exponent must be at least 2, got {m}")));
    }
    if sign != 1.0 && sign != -1.0 {
        return Err(FieldError::BadParameter(format!("fold sign must be +1 or -1, got {sign}")));
    }
    let text = format!("x^2 + s*y^{m} + i*y");
    FieldDef::parse(&format!("H2.fold{m}"), 2, false, &text, &[("s", sign)], "Proposition 2.2")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fieldlang::{eval_field, Params};

    #[test]
    fn lookups() {
        assert_eq!(catalog_get("H2.regular").unwrap().expr.to_string(), "x + i*y");
        assert_eq!(catalog_get("H3.DH").unwrap().expr.to_string(), "x^2 + y^2 - z^2 + i*z");
        assert_eq!(catalog_get("H2.hyperbolic").unwrap().provenance, "Theorem 2.1");
        assert!(matches!(catalog_get("nope"), Err(FieldError::UnknownField(_))));
    }

    #[test]
    fn names_unique_and_printed_forms_stable() {
        let all = catalog();
        assert!(all.len() >= 18);
        let mut names: Vec<_> = all.iter().map(|d| d.name.clone()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), all.len());
        for (d, en) in all.iter().zip(ENTRIES) {
            assert_eq!(d.expr.to_string(), en.expr, "{}", d.name);
        }
    }

    #[test]
    fn every_entry_evaluates_on_reference_region() {
        for def in catalog() {
            let n = def.arity();
            for i in 0..81usize {
                let p: Vec<f64> = (0..n).map(|a| -1.0 + ((i / 3usize.pow(a as u32)) % 3) as f64).collect();
                eval_field(&def, &p, &Params::new()).unwrap_or_else(|e| panic!("{}: {e}", def.name));
            }
        }
    }

    #[test]
    fn fold_builder() {
        let f = fold_m(6, -1.0).unwrap();
        assert_eq!(f.expr.to_string(), "x^2 + s*y^6 + i*y");
        assert!(fold_m(1, 1.0).is_err());
        assert!(fold_m(3, 0.5).is_err());
        assert_eq!(fold_m(4, 1.0).unwrap().expr, catalog_get("H2.fold4").unwrap().expr);
    }
}
