//! Cross-section spectral data and the built-in symmetric-space tables.
//!
//! A [`CrossSection`] carries the finite spectral prefixes that the
//! stability classifier consumes: Laplace–Beltrami eigenvalues on
//! functions, Einstein-operator eigenvalues on TT tensors, and connection
//! Laplacian eigenvalues on coclosed 1-forms, plus a rational threshold
//! below which each listed spectrum is certified complete. All values are
//! exact rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt::Write as _;

use crate::{Error, Result};

/// Spectral data of a compact Einstein cross-section `(F^n, g_F)` with
/// Einstein constant `n - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossSection {
    pub name: String,
    /// Dimension of F.
    pub n: u32,
    /// Fixed to `n - 1` by the normalization convention.
    pub einstein_constant: BigRational,
    /// Ascending Laplace–Beltrami eigenvalues on functions; first entry 0.
    pub scalar_spectrum: Vec<BigRational>,
    /// Ascending eigenvalues of the Einstein operator on TT tensors.
    pub tt_einstein_spectrum: Vec<BigRational>,
    /// Ascending eigenvalues of the connection Laplacian on coclosed 1-forms.
    pub coclosed_oneform_spectrum: Vec<BigRational>,
    /// Each listed spectrum is complete below this threshold.
    pub spectra_complete_below: BigRational,
}

/// Outcome of [`CrossSection::validate`]: hard errors and advisory warnings.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }
}

pub(crate) fn big(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub(crate) fn frac(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

impl CrossSection {
    /// Unit round sphere `S^n`, the canonical test link.
    ///
    /// Eigenvalue bands: functions `k(k+n-1)`, Einstein operator on TT
    /// `k(k+n-1) - 2n` for `k >= 2`, connection Laplacian on coclosed
    /// 1-forms `k(k+n-1) - 1` for `k >= 1`. On `S^2` there are no TT
    /// tensors at all, so that list is empty.
    pub fn round_sphere(n: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "round sphere needs n >= 2, got {n}"
            )));
        }
        let ni = n as i64;
        let band = |k: i64| big(k * (k + ni - 1));
        let scalar: Vec<_> = (0..=4).map(band).collect();
        let tt: Vec<_> = if n == 2 {
            Vec::new()
        } else {
            (2..=4).map(|k| band(k) - big(2 * ni)).collect()
        };
        let oneform: Vec<_> = (1..=3).map(|k| band(k) - big(1)).collect();
        let complete = [
            band(5),
            band(5) - big(2 * ni),
            band(4) - big(1),
        ]
        .into_iter()
        .min()
        .unwrap();
        Ok(CrossSection {
            name: format!("S^{n}"),
            n,
            einstein_constant: big(ni - 1),
            scalar_spectrum: scalar,
            tt_einstein_spectrum: tt,
            coclosed_oneform_spectrum: oneform,
            spectra_complete_below: complete,
        })
    }

    /// Collects hard errors (ordering, signs, wrong normalization) and
    /// warnings (eigenvalue estimate `lambda_1 >= n` violated).
    pub fn validate(&self) -> ValidationReport {
        let mut rep = ValidationReport::default();
        if self.n < 2 {
            rep.errors.push(format!("n must be >= 2, got {}", self.n));
        }
        if self.einstein_constant != big(self.n as i64 - 1) {
            rep.errors.push(format!(
                "einstein constant must be n - 1 = {}, got {}",
                self.n as i64 - 1,
                self.einstein_constant
            ));
        }
        let ascending = |name: &str, seq: &[BigRational], rep: &mut ValidationReport| {
            if seq.windows(2).any(|w| w[0] >= w[1]) {
                rep.errors.push(format!("{name} not ascending"));
            }
        };
        ascending("scalar_spectrum", &self.scalar_spectrum, &mut rep);
        ascending("tt_einstein_spectrum", &self.tt_einstein_spectrum, &mut rep);
        ascending(
            "oneform_spectrum",
            &self.coclosed_oneform_spectrum,
            &mut rep,
        );
        match self.scalar_spectrum.first() {
            Some(first) if !first.is_zero() => rep
                .errors
                .push("scalar_spectrum must start with 0".to_string()),
            None => rep.errors.push("scalar_spectrum empty".to_string()),
            _ => {}
        }
        if self
            .scalar_spectrum
            .iter()
            .any(|lambda| lambda.is_negative())
        {
            rep.errors
                .push("scalar_spectrum has negative entries".to_string());
        }
        if self
            .coclosed_oneform_spectrum
            .iter()
            .any(|mu| mu.is_negative())
        {
            rep.errors
                .push("oneform_spectrum has negative entries".to_string());
        }
        // Eigenvalue estimate for Einstein manifolds with constant n-1:
        // every nonzero scalar eigenvalue is >= n. A violation is suspect
        // data, not a hard error.
        let n_rat = big(self.n as i64);
        for lambda in &self.scalar_spectrum {
            if !lambda.is_zero() && *lambda < n_rat {
                rep.warnings.push(format!(
                    "scalar eigenvalue {lambda} below n = {} violates the Einstein eigenvalue bound",
                    self.n
                ));
            }
        }
        rep
    }

    /// Serializes to the key–value cross-section file format.
    pub fn to_file_string(&self) -> String {
        let fmt_seq = |seq: &[BigRational]| {
            seq.iter()
                .map(format_rational)
                .collect::<Vec<_>>()
                .join(", ")
        };
        let mut out = String::new();
        let _ = writeln!(out, "name = {}", self.name);
        let _ = writeln!(out, "n = {}", self.n);
        let _ = writeln!(out, "scalar_spectrum = {}", fmt_seq(&self.scalar_spectrum));
        let _ = writeln!(
            out,
            "tt_einstein_spectrum = {}",
            fmt_seq(&self.tt_einstein_spectrum)
        );
        let _ = writeln!(
            out,
            "oneform_spectrum = {}",
            fmt_seq(&self.coclosed_oneform_spectrum)
        );
        let _ = writeln!(
            out,
            "complete_below = {}",
            format_rational(&self.spectra_complete_below)
        );
        out
    }

    /// Parses the key–value cross-section file format. Unknown keys are
    /// errors; `name` and `n` are required; missing spectra default to
    /// empty with completeness 0.
    pub fn parse(text: &str) -> Result<Self> {
        let mut name = None;
        let mut n = None;
        let mut scalar = Vec::new();
        let mut tt = Vec::new();
        let mut oneform = Vec::new();
        let mut complete = BigRational::zero();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "name" => name = Some(value.to_string()),
                "n" => {
                    n = Some(value.parse::<u32>().map_err(|_| {
                        Error::Parse(format!("line {}: bad integer `{value}`", lineno + 1))
                    })?)
                }
                "scalar_spectrum" => scalar = parse_rational_seq(value, lineno + 1)?,
                "tt_einstein_spectrum" => tt = parse_rational_seq(value, lineno + 1)?,
                "oneform_spectrum" => oneform = parse_rational_seq(value, lineno + 1)?,
                "complete_below" => complete = parse_rational(value, lineno + 1)?,
                other => {
                    return Err(Error::Parse(format!(
                        "line {}: unknown key `{other}`",
                        lineno + 1
                    )))
                }
            }
        }
        let name = name.ok_or_else(|| Error::Parse("missing key `name`".into()))?;
        let n = n.ok_or_else(|| Error::Parse("missing key `n`".into()))?;
        Ok(CrossSection {
            name,
            n,
            einstein_constant: big(n as i64 - 1),
            scalar_spectrum: scalar,
            tt_einstein_spectrum: tt,
            coclosed_oneform_spectrum: oneform,
            spectra_complete_below: complete,
        })
    }
}

/// Formats a rational as `p` or `p/q`.
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p` or `p/q` into an exact rational.
pub fn parse_rational_str(s: &str) -> Result<BigRational> {
    parse_rational(s, 0)
}

pub(crate) fn parse_rational(s: &str, lineno: usize) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("line {lineno}: bad rational `{s}`"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        Ok(BigRational::new(p, q))
    } else {
        let p: BigInt = s.parse().map_err(|_| bad())?;
        Ok(BigRational::from_integer(p))
    }
}

fn parse_rational_seq(s: &str, lineno: usize) -> Result<Vec<BigRational>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|tok| parse_rational(tok, lineno)).collect()
}

/// One row of the built-in symmetric-space tables.
///
/// `lambda` is the smallest nonzero Laplace–Beltrami eigenvalue and
/// `theta` the smallest eigenvalue of the Lichnerowicz Laplacian on
/// trace-integral-zero symmetric 2-tensors, both divided by the Einstein
/// constant `n - 1`. `dim_listed` is stored verbatim from the source
/// tables and is never recomputed; the classifier uses it as `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub family: String,
    pub space: String,
    pub dim_listed: u32,
    pub lambda: BigRational,
    pub theta: BigRational,
    /// Strong tangential stability verdict as printed.
    pub sts_verdict: bool,
}

impl TableRow {
    fn new(
        family: &str,
        space: &str,
        dim_listed: u32,
        lambda: BigRational,
        theta: BigRational,
        sts_verdict: bool,
    ) -> Self {
        TableRow {
            family: family.to_string(),
            space: space.to_string(),
            dim_listed,
            lambda,
            theta,
            sts_verdict,
        }
    }
}

/// The two built-in tables, simple Lie groups first, then symmetric
/// spaces of non-group type. Parametrized families are instantiated at
/// their smallest admissible parameter; all rationals are verbatim.
/// Exactly four rows carry a positive verdict.
pub fn builtin_table() -> Vec<TableRow> {
    use TableRow as R;
    let r = frac;
    let b = big;
    vec![
        // simple Lie groups
        R::new("A_p", "SU(3)", 3, r(16, 9), r(16, 9), false),
        R::new("B_p", "Spin(5)", 10, r(5, 3), r(4, 3), false),
        R::new("B_p", "Spin(7)", 21, r(21, 10), r(12, 5), false),
        R::new("B_p", "Spin(9)", 40, r(16, 7), r(16, 7), false),
        R::new("C_p", "Sp(3)", 21, r(7, 4), r(11, 8), false),
        R::new("D_p", "Spin(6)", 21, r(5, 2), r(5, 2), false),
        R::new("E_6", "E_6", 156, r(26, 9), r(17, 6), false),
        R::new("E_7", "E_7", 266, r(19, 6), b(3), false),
        R::new("E_8", "E_8", 496, b(4), r(47, 15), true),
        R::new("F_4", "F_4", 52, r(8, 3), r(8, 3), false),
        R::new("G_2", "G_2", 14, b(2), b(2), false),
        // symmetric spaces of non-group type
        R::new("A I", "SU(3)/SO(3)", 5, r(20, 9), b(2), false),
        R::new("A I", "SU(6)/SO(6)", 20, r(20, 9), b(2), false),
        R::new("A II", "SU(4)/Sp(2)", 5, r(5, 4), b(3), false),
        R::new("A II", "SU(6)/Sp(3)", 14, r(14, 9), b(2), false),
        R::new("A III", "CP^2", 4, b(2), b(2), false),
        R::new("A III", "U(4)/(U(2)xU(2))", 8, b(2), b(2), false),
        R::new("B I", "SO(5)/(SO(3)xSO(2))", 6, b(2), r(4, 3), false),
        R::new("B I", "SO(7)/(SO(5)xSO(2))", 10, b(2), r(8, 5), false),
        R::new("B I", "SO(7)/(SO(4)xSO(3))", 12, r(12, 5), r(8, 5), false),
        R::new("B I", "SO(9)/(SO(3)xSO(6))", 18, r(18, 7), r(8, 7), false),
        R::new("B I", "SO(9)/(SO(5)xSO(4))", 20, r(18, 7), r(8, 7), false),
        R::new("B II", "S^2", 2, b(2), b(6), false),
        R::new("C I", "Sp(3)/U(3)", 12, b(2), r(3, 2), false),
        R::new("C II", "S^4", 4, r(4, 3), r(10, 3), false),
        R::new("C II", "HP^2", 8, r(3, 2), r(3, 2), false),
        R::new("C II", "Sp(4)/(Sp(2)xSp(2))", 16, r(8, 5), r(8, 5), false),
        R::new("D I", "SO(8)/(SO(5)xSO(3))", 15, r(5, 2), r(5, 2), false),
        R::new("D I", "SO(8)/(SO(6)xSO(2))", 12, b(2), b(2), false),
        R::new("D I", "SO(8)/(SO(4)xSO(4))", 16, r(8, 3), r(8, 3), false),
        R::new("D I", "SO(10)/(SO(6)xSO(4))", 24, r(5, 2), r(5, 2), false),
        R::new("D I", "SO(10)/(SO(7)xSO(3))", 21, r(5, 2), r(5, 2), false),
        R::new("D II", "S^7", 7, r(7, 6), r(8, 3), false),
        R::new("D III", "SO(10)/U(5)", 20, b(2), b(2), false),
        R::new("E I", "E_6/[Sp(4)/{+-1}]", 42, r(28, 9), b(3), false),
        R::new("E II", "E_6/(SU(2).SU(6))", 40, b(3), b(3), false),
        R::new("E III", "E_6/(SO(10).SO(2))", 32, b(2), b(2), false),
        R::new("E IV", "E_6/F_4", 26, r(13, 9), r(13, 9), false),
        R::new("E V", "E_7/[SU(8)/{+-1}]", 70, r(10, 3), r(28, 9), true),
        R::new("E VI", "E_7/(SO(12).SU(2))", 64, r(28, 9), r(28, 9), false),
        R::new("E VII", "E_7/(E_6.SO(2))", 54, b(2), b(2), false),
        R::new("E VIII", "E_8/SO(16)", 128, r(62, 15), r(16, 5), true),
        R::new("E IX", "E_8/(E_7.SU(2))", 112, r(16, 5), r(16, 5), true),
        R::new("F I", "F_4/(Sp(3).SU(2))", 28, r(26, 9), r(26, 9), false),
        R::new("F II", "F_4/Spin(9)", 16, r(4, 3), r(4, 3), false),
        R::new("G", "G_2/SO(4)", 8, r(7, 3), r(7, 3), false),
    ]
}

/// CSV export of the built-in table, columns `family,space,dim,Lambda,Theta,sts`.
pub fn table_to_csv(rows: &[TableRow]) -> String {
    let mut out = String::from("family,space,dim,Lambda,Theta,sts\n");
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            row.family,
            row.space,
            row.dim_listed,
            format_rational(&row.lambda),
            format_rational(&row.theta),
            if row.sts_verdict { "yes" } else { "no" }
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_table_shape() {
        let table = builtin_table();
        assert_eq!(table.len(), 46);
        let yes: Vec<_> = table
            .iter()
            .filter(|r| r.sts_verdict)
            .map(|r| r.space.as_str())
            .collect();
        assert_eq!(
            yes,
            vec!["E_8", "E_7/[SU(8)/{+-1}]", "E_8/SO(16)", "E_8/(E_7.SU(2))"]
        );
    }

    #[test]
    fn builtin_table_spot_values() {
        let table = builtin_table();
        let e8 = table.iter().find(|r| r.space == "E_8").unwrap();
        assert_eq!(e8.dim_listed, 496);
        assert_eq!(e8.lambda, big(4));
        assert_eq!(e8.theta, frac(47, 15));
        assert!(e8.sts_verdict);

        let g2 = table
            .iter()
            .find(|r| r.space == "G_2" && r.family == "G_2")
            .unwrap();
        assert_eq!(g2.dim_listed, 14);
        assert_eq!(g2.lambda, big(2));
        assert_eq!(g2.theta, big(2));
        assert!(!g2.sts_verdict);

        let f2 = table.iter().find(|r| r.family == "F II").unwrap();
        assert_eq!(f2.dim_listed, 16);
        assert_eq!(f2.lambda, frac(4, 3));
        assert_eq!(f2.theta, frac(4, 3));
        assert!(!f2.sts_verdict);
    }

    #[test]
    fn round_sphere_bands() {
        let s2 = CrossSection::round_sphere(2).unwrap();
        assert_eq!(s2.scalar_spectrum[..3], [big(0), big(2), big(6)]);
        assert!(s2.tt_einstein_spectrum.is_empty());

        let s3 = CrossSection::round_sphere(3).unwrap();
        assert_eq!(s3.scalar_spectrum[1], big(3));
        assert_eq!(s3.einstein_constant, big(2));
        assert_eq!(s3.tt_einstein_spectrum[0], big(2));
        assert_eq!(s3.coclosed_oneform_spectrum[0], big(2));

        for n in 2..12 {
            let s = CrossSection::round_sphere(n).unwrap();
            assert_eq!(s.einstein_constant, big(n as i64 - 1));
            assert!(s.validate().is_ok());
            assert!(s.validate().warnings.is_empty());
            // enough data for the tangential check
            assert!(s.spectra_complete_below >= big(2 * (n as i64 + 1)));
        }
    }

    #[test]
    fn round_sphere_rejects_n1() {
        assert!(CrossSection::round_sphere(1).is_err());
    }

    #[test]
    fn validate_flags_unsorted() {
        let mut cs = CrossSection::round_sphere(3).unwrap();
        cs.scalar_spectrum = vec![big(0), big(3), big(2)];
        let rep = cs.validate();
        assert!(rep.errors.iter().any(|e| e.contains("not ascending")));
    }

    #[test]
    fn validate_warns_on_small_eigenvalue() {
        let mut cs = CrossSection::round_sphere(3).unwrap();
        cs.scalar_spectrum = vec![big(0), big(1), big(3), big(8)];
        let rep = cs.validate();
        assert!(rep.is_ok());
        assert_eq!(rep.warnings.len(), 1);
    }

    #[test]
    fn file_roundtrip() {
        let cs = CrossSection::round_sphere(4).unwrap();
        let text = cs.to_file_string();
        let back = CrossSection::parse(&text).unwrap();
        assert_eq!(cs, back);
    }

    #[test]
    fn parse_rejects_unknown_key() {
        let err = CrossSection::parse("name = X\nn = 3\ngird_n = 7\n").unwrap_err();
        assert!(err.to_string().contains("gird_n"));
    }

    #[test]
    fn parse_exact_fraction() {
        let cs =
            CrossSection::parse("name = X\nn = 3\nscalar_spectrum = 0, 16/5\ncomplete_below = 7/2\n")
                .unwrap();
        assert_eq!(cs.scalar_spectrum[1], frac(16, 5));
        assert_eq!(cs.spectra_complete_below, frac(7, 2));
    }

    #[test]
    fn csv_header_and_rows() {
        let csv = table_to_csv(&builtin_table());
        assert!(csv.starts_with("family,space,dim,Lambda,Theta,sts\n"));
        assert_eq!(csv.lines().count(), 47);
        assert!(csv.contains("E_8,E_8,496,4,47/15,yes"));
        assert!(csv.contains("E VI,E_7/(SO(12).SU(2)),64,28/9,28/9,no"));
    }
}
