use num_complex::Complex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{BigradedPoly, Monomial4};
use crate::scalar::Real;

/// One serialized term `{a, b, c, d, re, im}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub a: u32,
    pub b: u32,
    pub c: u32,
    pub d: u32,
    pub re: f64,
    pub im: f64,
}

impl<T: Real> BigradedPoly<T> {
    /// Terms sorted lexicographically by `(a, b, c, d)`.
    pub fn to_records(&self) -> Vec<TermRecord> {
        self.terms()
            .map(|(m, c)| TermRecord {
                a: m.a,
                b: m.b,
                c: m.c,
                d: m.d,
                re: c.re.to_f64().unwrap_or(f64::NAN),
                im: c.im.to_f64().unwrap_or(f64::NAN),
            })
            .collect()
    }

    /// Order-insensitive; repeated monomials are summed.
    pub fn from_records(records: &[TermRecord]) -> Self {
        Self::from_terms(records.iter().map(|r| {
            (
                Monomial4::new(r.a, r.b, r.c, r.d),
                Complex::new(T::lit(r.re), T::lit(r.im)),
            )
        }))
    }
}

impl<T: Real> Serialize for BigradedPoly<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_records().serialize(serializer)
    }
}

impl<'de, T: Real> Deserialize<'de> for BigradedPoly<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let records = Vec::<TermRecord>::deserialize(deserializer)?;
        Ok(Self::from_records(&records))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn written_sorted_read_unsorted() {
        let json = r#"[{"a":0,"b":1,"c":0,"d":1,"re":0.3,"im":0.0},{"a":1,"b":0,"c":0,"d":0,"re":1.0,"im":-2.0}]"#;
        let p: BigradedPoly<f64> = serde_json::from_str(json).unwrap();
        let out = serde_json::to_string(&p).unwrap();
        assert!(out.starts_with(r#"[{"a":0,"b":1"#) || out.starts_with(r#"[{"a":0,"b":1,"c":0,"d":1"#));
        let recs = p.to_records();
        assert_eq!((recs[0].a, recs[1].a), (0, 1));
    }

    proptest! {
        #[test]
        fn json_roundtrip(ts in prop::collection::vec(((0u32..4, 0u32..4, 0u32..4, 0u32..4), -5.0f64..5.0, -5.0f64..5.0), 0..8)) {
            let p = BigradedPoly::<f64>::from_terms(ts.into_iter().map(|((a,b,c,d),re,im)| (Monomial4::new(a,b,c,d), Complex::new(re,im))));
            let s = serde_json::to_string(&p).unwrap();
            let q: BigradedPoly<f64> = serde_json::from_str(&s).unwrap();
            prop_assert_eq!(p, q);
        }
    }
}
