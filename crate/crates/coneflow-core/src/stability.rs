//! Exact spectral stability classification.
//!
//! Every verdict in this module is decided in rational arithmetic; floats
//! appear only in reported indicial exponents and root enclosures, never
//! in a comparison that feeds a verdict.
//!
//! The classifier rests on three per-sector conditions on a cross-section
//! `(F^n, g_F)` with Einstein constant `n - 1`:
//!
//! * TT sector: `Spec(Δ_E|TT) > n`,
//! * coclosed 1-form sector: `Spec(Δ) > n + sqrt(n^2+2n+1) = 2n + 1`,
//! * scalar sector: the cubic `P(λ) > 0` for every positive
//!   Laplace–Beltrami eigenvalue `λ`,
//!
//! where `P(λ) = n^2 (λ-3n+2)(λ+4-n)(λ+n+2) - 8n(n-1)(λ-n)(λ+n+2)
//! - 8λ n(n+1)(λ-3n+2)`. The typeset product is read with an overall
//! `n^2` factor; the 2x2 and 3x3 determinant identities checked by
//! [`det_identities_check`] are the internal consistency test for that
//! reading.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::cross_section::{big, format_rational, CrossSection, TableRow};
use crate::{Error, Result};

/// Which radicand the decay exponents `mu_0, mu_1` use.
///
/// `AsPrinted` is `sqrt(u + (n-1)/2) - (n-1)/2`; `Squared` is
/// `sqrt(u + ((n-1)/2)^2) - (n-1)/2`. The squared variant is the default:
/// it is the one that makes `u > n` equivalent to `mu > 1`, matching the
/// weight-window remark, and it is consistent with the indicial function
/// [`nu`]. Both are kept selectable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MuVariant {
    AsPrinted,
    #[default]
    Squared,
}

/// Indicial data derived from a cross-section's tangential spectra.
#[derive(Debug, Clone)]
pub struct IndicialData {
    pub n: u32,
    /// `(lambda, nu(lambda))` pairs for the listed scalar eigenvalues.
    pub nu_of: Vec<(BigRational, f64)>,
    pub u0: BigRational,
    pub u1: BigRational,
    pub mu0: f64,
    pub mu1: f64,
    pub variant: MuVariant,
}

impl IndicialData {
    /// Builds indicial data from supplied sector minima `u0, u1`.
    ///
    /// `u0` is the minimal nonzero tangential eigenvalue on trace-free
    /// tensors and is accepted as direct input; TT Einstein data converts
    /// via the relation `Δ_L = Δ_E + 2(n-1) id`.
    pub fn new(
        cs: &CrossSection,
        u0: BigRational,
        u1: BigRational,
        variant: MuVariant,
    ) -> Result<Self> {
        let n = cs.n;
        let nu_of = cs
            .scalar_spectrum
            .iter()
            .map(|l| nu(n, l).map(|v| (l.clone(), v)))
            .collect::<Result<Vec<_>>>()?;
        let (mu0, mu1) = mu_exponents(n, &u0, &u1, variant)?;
        Ok(IndicialData {
            n,
            nu_of,
            u0,
            u1,
            mu0,
            mu1,
            variant,
        })
    }
}

/// `nu(lambda) = sqrt(lambda + ((n-1)/2)^2)`.
pub fn nu(n: u32, lambda: &BigRational) -> Result<f64> {
    let half = frac_f64(lambda) + ((n as f64 - 1.0) / 2.0).powi(2);
    if half < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "nu radicand negative: lambda = {lambda}, n = {n}"
        )));
    }
    Ok(half.sqrt())
}

/// Decay exponents `(mu0, mu1)` from sector minima `(u0, u1)`.
pub fn mu_exponents(
    n: u32,
    u0: &BigRational,
    u1: &BigRational,
    variant: MuVariant,
) -> Result<(f64, f64)> {
    let one = |u: &BigRational| -> Result<f64> {
        if !u.is_positive() {
            return Err(Error::InvalidParameter(format!("nonpositive u = {u}")));
        }
        let k = (n as f64 - 1.0) / 2.0;
        let radicand = match variant {
            MuVariant::AsPrinted => frac_f64(u) + k,
            MuVariant::Squared => frac_f64(u) + k * k,
        };
        Ok(radicand.sqrt() - k)
    };
    Ok((one(u0)?, one(u1)?))
}

/// Admissible weight window for `(gamma0, gamma1, alpha)`.
///
/// The constraints are `gamma0 in (0, mu0)`, `gamma1 in (0, mu1)`,
/// `gamma0 <= 2 gamma1`, `gamma1 <= gamma0`, both `< gamma`, and
/// `alpha in (0, mu0-gamma0) ∩ (0, mu1-gamma1)`.
#[derive(Debug, Clone)]
pub struct WeightWindow {
    pub gamma0_interval: (f64, f64),
    pub gamma1_interval: (f64, f64),
    pub alpha_interval: (f64, f64),
    pub feasible: bool,
    /// Deterministic sample `(gamma0, gamma1, alpha)` if feasible.
    pub sample_point: Option<(f64, f64, f64)>,
}

/// Checks one `(gamma0, gamma1, alpha)` triple against every inequality.
pub fn weights_admissible(
    mu0: f64,
    mu1: f64,
    gamma: f64,
    (g0, g1, alpha): (f64, f64, f64),
) -> bool {
    g0 > 0.0
        && g0 < mu0
        && g0 <= 2.0 * g1
        && g0 < gamma
        && g1 > 0.0
        && g1 < mu1
        && g1 <= g0
        && g1 < gamma
        && alpha > 0.0
        && alpha < mu0 - g0
        && alpha < mu1 - g1
}

/// Computes the admissible weight window; infeasible is a valid result.
pub fn admissible_weights(_n: u32, mu0: f64, mu1: f64, gamma: f64) -> WeightWindow {
    let g0_sup = mu0.min(gamma);
    let g1_sup = mu1.min(gamma);
    let mut window = WeightWindow {
        gamma0_interval: (0.0, g0_sup),
        gamma1_interval: (0.0, g1_sup),
        alpha_interval: (0.0, 0.0),
        feasible: false,
        sample_point: None,
    };
    if mu0 <= 0.0 || mu1 <= 0.0 || gamma <= 0.0 {
        return window;
    }
    const SHRINK: f64 = 1.0 - 1e-6;
    let g1 = SHRINK * mu1.min(gamma).min(mu0);
    let g0 = (SHRINK * mu0.min(2.0 * g1).min(gamma)).max(g1);
    let slack = (mu0 - g0).min(mu1 - g1);
    let alpha = 0.5 * slack;
    if weights_admissible(mu0, mu1, gamma, (g0, g1, alpha)) {
        window.alpha_interval = (0.0, slack);
        window.feasible = true;
        window.sample_point = Some((g0, g1, alpha));
    }
    window
}

/// Whether a sample with `gamma0, gamma1 > 1` exists, with a verified
/// witness. Requires `min(mu0, mu1, gamma) > 1`.
pub fn weights_above_one(mu0: f64, mu1: f64, gamma: f64) -> Option<(f64, f64, f64)> {
    let m = mu0.min(mu1).min(gamma);
    if m <= 1.0 {
        return None;
    }
    let g = 0.5 * (1.0 + m);
    let alpha = 0.5 * (mu0 - g).min(mu1 - g);
    let sample = (g, g, alpha);
    weights_admissible(mu0, mu1, gamma, sample).then_some(sample)
}

/// `n + sqrt(n^2 + 2n + 1)`, simplified exactly to `2n + 1`.
pub fn oneform_threshold(n: u32) -> BigRational {
    big(2 * n as i64 + 1)
}

/// `u0 > n` and `u1 > n`, the hypothesis under which the weight window
/// admits `gamma0, gamma1 > 1`.
pub fn strong_assumption_check(u0: &BigRational, u1: &BigRational, n: u32) -> bool {
    let n = big(n as i64);
    *u0 > n && *u1 > n
}

// ---------------------------------------------------------------------------
// sector matrices

/// Tangential operator on the coclosed 1-form block, as a 2x2 quadratic
/// form: `[[ (mu-(n-1))^2/2, -2(mu-(n-1)) ], [ -2(mu-(n-1)), 2mu+2n+6 ]]`.
pub fn build_v3_matrix(n: u32, mu: &BigRational) -> [[BigRational; 2]; 2] {
    let d = mu - big(n as i64 - 1);
    [
        [&d * &d / big(2), -big(2) * &d],
        [-big(2) * &d, big(2) * mu + big(2 * n as i64 + 6)],
    ]
}

/// Determinant of the column-reduced shifted matrix
/// `B = [[ (mu-(2n-1))/2, -2(mu-(n-1)) ], [ -2, 2mu+6 ]]` governing
/// positivity of the 1-form block of the shifted operator.
pub fn v3_shifted_det(n: u32, mu: &BigRational) -> BigRational {
    let ni = n as i64;
    (mu - big(2 * ni - 1)) * (big(2) * mu + big(6)) / big(2) - big(4) * (mu - big(ni - 1))
}

/// Positive-definiteness of the shifted 1-form block; equivalent to
/// `mu > 2n + 1`.
pub fn v3_shifted_positive(n: u32, mu: &BigRational) -> bool {
    let a11 = mu - big(2 * n as i64 - 1);
    a11.is_positive() && v3_shifted_det(n, mu).is_positive()
}

/// Shifted scalar-sector block as a symmetric 3x3 matrix in exact
/// rationals:
/// `a11 = n(n-1) λ (λ-n) [λ - 2(n-1) - n]`, `a22 = 2λ [λ - (n-1) + 3]`,
/// `a33 = n {(n+1)λ - 2(n-1) - n(n+1) + 2n(n+3)}`,
/// `a12 = -4(n-1) λ (λ-n)`, `a23 = 4(n+1) λ`, `a13 = 0`.
pub fn build_v4_matrix(n: u32, lambda: &BigRational) -> [[BigRational; 3]; 3] {
    let ni = n as i64;
    let l = lambda;
    let a11 = big(ni) * big(ni - 1) * l * (l - big(ni)) * (l - big(2 * (ni - 1) + ni));
    let a22 = big(2) * l * (l - big(ni - 1) + big(3));
    let a33 = big(ni)
        * (big(ni + 1) * l - big(2 * (ni - 1)) - big(ni * (ni + 1)) + big(2 * ni * (ni + 3)));
    let a12 = -big(4) * big(ni - 1) * l * (l - big(ni));
    let a23 = big(4) * big(ni + 1) * l;
    let zero = BigRational::zero();
    [
        [a11, a12.clone(), zero.clone()],
        [a12, a22, a23.clone()],
        [zero, a23, a33],
    ]
}

fn det2(m: [[&BigRational; 2]; 2]) -> BigRational {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

fn det3(m: &[[BigRational; 3]; 3]) -> BigRational {
    &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1])
        - &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0])
        + &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0])
}

/// The scalar-sector cubic `P(λ)`, evaluated exactly.
pub fn scalar_sector_p(n: u32, lambda: &BigRational) -> BigRational {
    let ni = n as i64;
    let l = lambda;
    let n2 = big(ni) * big(ni);
    n2 * (l - big(3 * ni - 2)) * (l + big(4 - ni)) * (l + big(ni + 2))
        - big(8 * ni) * big(ni - 1) * (l - big(ni)) * (l + big(ni + 2))
        - big(8) * l * big(ni) * big(ni + 1) * (l - big(3 * ni - 2))
}

/// `(P(λ), P(λ) > 0)`.
pub fn scalar_sector_condition(n: u32, lambda: &BigRational) -> (BigRational, bool) {
    let p = scalar_sector_p(n, lambda);
    let pos = p.is_positive();
    (p, pos)
}

/// Verifies the two determinant identities for the shifted 3x3 block:
///
/// * lower-right 2x2 minor equals
///   `λ [2n(n+1)λ^2 - 4(n+1)(n+4)λ - 2n(n-4)(n^2+3n+2)]`,
/// * full determinant equals `(n-1) λ (λ-n) · 2λ · (n+1) · P(λ)`.
///
/// Both are exact rational comparisons; a failure signals a
/// transcription bug in the matrix entries or in `P`.
pub fn det_identities_check(n: u32, lambda: &BigRational) -> (bool, bool) {
    let ni = n as i64;
    let l = lambda;
    let m = build_v4_matrix(n, lambda);
    let minor = det2([[&m[1][1], &m[1][2]], [&m[2][1], &m[2][2]]]);
    let minor_expected = l
        * (big(2 * ni) * big(ni + 1) * l * l
            - big(4) * big(ni + 1) * big(ni + 4) * l
            - big(2 * ni) * big(ni - 4) * big(ni * ni + 3 * ni + 2));
    let full = det3(&m);
    let full_expected =
        big(ni - 1) * l * (l - big(ni)) * big(2) * l * big(ni + 1) * scalar_sector_p(n, lambda);
    (minor == minor_expected, full == full_expected)
}

// ---------------------------------------------------------------------------
// root closure for the scalar-sector cubic

/// Quadratic cofactor `Q` with `P(λ) = (λ - n) Q(λ)`, computed by exact
/// synthetic division (the root at `λ = n` is structural).
fn scalar_sector_quadratic(n: u32) -> (BigRational, BigRational, BigRational) {
    // P = a3 λ^3 + a2 λ^2 + a1 λ + a0 with
    // a3 = n^2, a2 = -(3n^3 + 8n^2), a1 = -n^4 + 8n^3 + 12n^2,
    // a0 = 3n^3 (n^2 - 4).
    let ni = n as i64;
    let a3 = big(ni * ni);
    let a2 = -big(3 * ni * ni * ni + 8 * ni * ni);
    let a1 = big(-(ni * ni * ni * ni) + 8 * ni * ni * ni + 12 * ni * ni);
    // synthetic division by (λ - n)
    let b2 = a3;
    let b1 = &a2 + &b2 * big(ni);
    let b0 = &a1 + &b1 * big(ni);
    (b2, b1, b0)
}

/// Exactly decides whether `x` lies strictly above every real root of
/// `P(· ; n)`.
pub fn above_all_roots(n: u32, x: &BigRational) -> bool {
    if *x <= big(n as i64) {
        return false;
    }
    let (a, b, c) = scalar_sector_quadratic(n);
    let disc = &b * &b - big(4) * &a * &c;
    if disc.is_negative() {
        return true;
    }
    // vertex of the upward quadratic; above both roots iff right of the
    // vertex with positive value
    let vertex = -&b / (big(2) * &a);
    let q = (&a * x + &b) * x + &c;
    *x > vertex && q.is_positive()
}

/// Encloses the largest real root of `P(· ; n)` by sign bisection on
/// rationals to width below `1e-9`, with exact sign confirmation at the
/// endpoints. Returns `(lo, hi)` with `P(lo) <= 0 < P(hi)` or the
/// structural root `λ = n` when the quadratic cofactor has no real root
/// beyond it.
pub fn largest_root_enclosure(n: u32) -> (BigRational, BigRational) {
    let (a, b, c) = scalar_sector_quadratic(n);
    let disc = &b * &b - big(4) * &a * &c;
    let nn = big(n as i64);
    if disc.is_negative() {
        return (nn.clone(), nn);
    }
    let q = |x: &BigRational| (&a * x + &b) * x + &c;
    let vertex = -&b / (big(2) * &a);
    let mut lo = if vertex > nn { vertex } else { nn };
    let mut span = BigRational::one();
    let mut hi = &lo + &span;
    while !q(&hi).is_positive() {
        span = &span * big(2);
        hi = &lo + &span;
    }
    let width = BigRational::new(BigInt::from(1), BigInt::from(1_000_000_000u64));
    while &hi - &lo > width {
        let mid = (&lo + &hi) / big(2);
        if q(&mid).is_positive() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}

// ---------------------------------------------------------------------------
// verdicts

/// One named condition with its outcome and a human-readable witness.
#[derive(Debug, Clone)]
pub struct ConditionOutcome {
    pub name: String,
    pub passed: bool,
    pub witness: String,
}

/// Stability verdict with per-condition records.
///
/// The three flags are evaluated independently; none is inferred from
/// another. A `None` flag means the input did not carry the data that
/// condition needs (table rows carry no spectra, so only `strong` is
/// decided for them).
#[derive(Debug, Clone, Default)]
pub struct StabilityVerdict {
    pub tangential: Option<bool>,
    pub strict: Option<bool>,
    pub strong: Option<bool>,
    pub conditions: Vec<ConditionOutcome>,
    pub notes: Vec<String>,
}

impl StabilityVerdict {
    fn push(&mut self, name: &str, passed: bool, witness: String) {
        self.conditions.push(ConditionOutcome {
            name: name.to_string(),
            passed,
            witness,
        });
    }
}

/// Tangential and strict tangential stability from spectra.
///
/// Tangential: `Spec(Δ_E|TT) >= 0` and no nonzero Laplace eigenvalue in
/// the open interval `(n, 2(n+1))`. Strict: `> 0` and the closed
/// interval `[n, 2(n+1)]`. Requires the spectra to be certified complete
/// below `2(n+1)`.
pub fn check_tangential(cs: &CrossSection) -> Result<(bool, bool, Vec<ConditionOutcome>)> {
    let n = cs.n as i64;
    let two_np1 = big(2 * (n + 1));
    if cs.spectra_complete_below < two_np1 {
        return Err(Error::InsufficientSpectralData(format!(
            "tangential check needs spectra complete below 2(n+1) = {}, have {}",
            format_rational(&two_np1),
            format_rational(&cs.spectra_complete_below)
        )));
    }
    let mut conditions = Vec::new();
    let nn = big(n);

    let tt_nonneg = cs.tt_einstein_spectrum.iter().find(|k| k.is_negative());
    conditions.push(ConditionOutcome {
        name: "tt_nonnegative".into(),
        passed: tt_nonneg.is_none(),
        witness: match tt_nonneg {
            Some(k) => format!("TT eigenvalue {} < 0", format_rational(k)),
            None => "all listed TT eigenvalues >= 0".into(),
        },
    });
    let tt_pos = cs
        .tt_einstein_spectrum
        .iter()
        .find(|k| !k.is_positive());
    conditions.push(ConditionOutcome {
        name: "tt_positive".into(),
        passed: tt_pos.is_none(),
        witness: match tt_pos {
            Some(k) => format!("TT eigenvalue {} <= 0", format_rational(k)),
            None => "all listed TT eigenvalues > 0".into(),
        },
    });
    let open_hit = cs
        .scalar_spectrum
        .iter()
        .find(|l| !l.is_zero() && **l > nn && **l < two_np1);
    conditions.push(ConditionOutcome {
        name: "scalar_gap_open".into(),
        passed: open_hit.is_none(),
        witness: match open_hit {
            Some(l) => format!(
                "eigenvalue {} inside ({}, {})",
                format_rational(l),
                n,
                format_rational(&two_np1)
            ),
            None => "no nonzero eigenvalue inside the open interval".into(),
        },
    });
    let closed_hit = cs
        .scalar_spectrum
        .iter()
        .find(|l| !l.is_zero() && **l >= nn && **l <= two_np1);
    conditions.push(ConditionOutcome {
        name: "scalar_gap_closed".into(),
        passed: closed_hit.is_none(),
        witness: match closed_hit {
            Some(l) => format!(
                "eigenvalue {} inside [{}, {}]",
                format_rational(l),
                n,
                format_rational(&two_np1)
            ),
            None => "no nonzero eigenvalue inside the closed interval".into(),
        },
    });

    let tangential = conditions[0].passed && conditions[2].passed;
    let strict = conditions[1].passed && conditions[3].passed;
    Ok((tangential, strict, conditions))
}

/// Full verdict from spectra: tangential, strict, and strong.
///
/// Strong requires `Spec(Δ_E|TT) > n`, coclosed 1-forms above `2n+1`,
/// and `P(λ) > 0` for every positive scalar eigenvalue. The infinite
/// quantifier is closed by the largest real root of `P`: all listed
/// positive eigenvalues are tested exactly, and the completeness
/// threshold must lie strictly above every root so that unlisted
/// eigenvalues cannot violate the condition.
pub fn check_strong(cs: &CrossSection, variant: MuVariant) -> Result<StabilityVerdict> {
    let (tangential, strict, mut conditions) = check_tangential(cs)?;
    let n = cs.n;
    let ni = n as i64;
    let mut verdict = StabilityVerdict::default();

    let tt_bound = big(ni);
    let tt_fail = cs.tt_einstein_spectrum.iter().find(|k| **k <= tt_bound);
    verdict.push(
        "strong_tt_above_n",
        tt_fail.is_none(),
        match tt_fail {
            Some(k) => format!("TT eigenvalue {} <= n = {}", format_rational(k), n),
            None => format!("all listed TT eigenvalues > {n}"),
        },
    );

    let threshold = oneform_threshold(n);
    let of_fail = cs
        .coclosed_oneform_spectrum
        .iter()
        .find(|m| **m <= threshold);
    verdict.push(
        "strong_oneform_above_2n_plus_1",
        of_fail.is_none(),
        match of_fail {
            Some(m) => format!(
                "1-form eigenvalue {} <= 2n+1 = {}",
                format_rational(m),
                format_rational(&threshold)
            ),
            None => format!(
                "all listed 1-form eigenvalues > {}",
                format_rational(&threshold)
            ),
        },
    );

    let p_fail = cs
        .scalar_spectrum
        .iter()
        .filter(|l| l.is_positive())
        .find(|l| !scalar_sector_p(n, l).is_positive());
    let (root_lo, root_hi) = largest_root_enclosure(n);
    let closure_ok = above_all_roots(n, &cs.spectra_complete_below);
    verdict.push(
        "strong_scalar_cubic",
        p_fail.is_none(),
        match p_fail {
            Some(l) => {
                let p = scalar_sector_p(n, l);
                format!(
                    "P({}) = {} <= 0",
                    format_rational(l),
                    format_rational(&p)
                )
            }
            None => "P(lambda) > 0 for every listed positive eigenvalue".into(),
        },
    );
    if p_fail.is_none() && !closure_ok {
        // all listed eigenvalues pass but the tail is not certified past
        // the last root of P
        let tt_ok = verdict.conditions[0].passed;
        let of_ok = verdict.conditions[1].passed;
        if tt_ok && of_ok {
            return Err(Error::InsufficientSpectralData(format!(
                "scalar spectrum complete below {} but the largest root of P lies in [{}, {}]",
                format_rational(&cs.spectra_complete_below),
                root_lo.to_f64().unwrap_or(f64::NAN),
                root_hi.to_f64().unwrap_or(f64::NAN),
            )));
        }
        verdict.notes.push(
            "scalar cubic closure not certified above the listed prefix; verdict already \
             negative on another sector"
                .into(),
        );
    }

    let strong = verdict.conditions.iter().all(|c| c.passed) && closure_ok;
    verdict.tangential = Some(tangential);
    verdict.strict = Some(strict);
    verdict.strong = Some(strong);
    verdict.conditions.append(&mut conditions);
    verdict.notes.push(format!(
        "largest root of the scalar cubic lies in [{:.9}, {:.9}]",
        root_lo.to_f64().unwrap_or(f64::NAN),
        root_hi.to_f64().unwrap_or(f64::NAN)
    ));
    if let Some(u1) = cs.scalar_spectrum.iter().find(|l| l.is_positive()) {
        if let Some(u0) = cs.tt_einstein_spectrum.first() {
            // TT data converts to the tangential operator by
            // Δ_L = Δ_E + 2(n-1) id
            let u0_shifted = u0 + big(2 * (ni - 1));
            let (mu0, mu1) = mu_exponents(n, &u0_shifted, u1, variant)?;
            verdict.notes.push(format!(
                "indicial exponents ({variant:?}): mu0 = {mu0:.6} (from min TT + 2(n-1)), mu1 = {mu1:.6}"
            ));
        }
    }
    Ok(verdict)
}

/// Classifies one built-in table row from `(n, Lambda, Theta)` alone,
/// with `n = dim_listed` verbatim.
///
/// Conditions, all exact: `(n-1)Θ - 2(n-1) > n` (TT sector via
/// `Δ_L = Δ_E + 2(n-1) id`), `(n-1)Θ > 3n` (1-form sector, using
/// `sqrt(n^2+2n+1) = n+1`), and the scalar cubic positive at and above
/// `λ = (n-1)Λ`.
pub fn classify_table_row(row: &TableRow) -> StabilityVerdict {
    let n = row.dim_listed;
    let ni = n as i64;
    let mut verdict = StabilityVerdict::default();
    let nm1 = big(ni - 1);

    let tt_lhs = &nm1 * &row.theta - big(2) * &nm1;
    let tt_ok = tt_lhs > big(ni);
    verdict.push(
        "tt_from_theta",
        tt_ok,
        format!(
            "(n-1)Theta - 2(n-1) = {} vs n = {}",
            format_rational(&tt_lhs),
            n
        ),
    );

    let of_lhs = &nm1 * &row.theta;
    let of_ok = of_lhs > big(3 * ni);
    verdict.push(
        "oneform_from_theta",
        of_ok,
        format!(
            "(n-1)Theta = {} vs 2n-1 + (n+1) = {}",
            format_rational(&of_lhs),
            3 * ni
        ),
    );

    let lambda_min = &nm1 * &row.lambda;
    let (p, p_pos) = scalar_sector_condition(n, &lambda_min);
    let closed = above_all_roots(n, &lambda_min);
    verdict.push(
        "scalar_sector_p",
        p_pos && closed,
        if p_pos && closed {
            format!("P((n-1)Lambda) = {} > 0", format_rational(&p))
        } else if !p_pos {
            format!("scalar sector P < 0: P({}) = {}", format_rational(&lambda_min), format_rational(&p))
        } else {
            format!(
                "P({}) > 0 but a larger root of P remains above it",
                format_rational(&lambda_min)
            )
        },
    );

    verdict.strong = Some(tt_ok && of_ok && p_pos && closed);
    verdict
        .notes
        .push(format!("n = dim as listed = {n}; all arithmetic exact"));
    verdict
}

fn frac_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cross_section::{big, builtin_table, frac};
    use proptest::prelude::*;

    #[test]
    fn nu_examples() {
        assert_eq!(nu(3, &big(0)).unwrap(), 1.0);
        assert_eq!(nu(5, &big(0)).unwrap(), 2.0);
        // nu(n, n) = (n+1)/2, brute check over n = 2..50
        for n in 2..=50u32 {
            let got = nu(n, &big(n as i64)).unwrap();
            let want = (n as f64 + 1.0) / 2.0;
            assert!((got - want).abs() < 1e-12, "n = {n}: {got} vs {want}");
        }
    }

    #[test]
    fn nu_rejects_negative_radicand() {
        assert!(nu(2, &big(-10)).is_err());
    }

    #[test]
    fn mu_examples() {
        let (mu0, _) = mu_exponents(3, &big(4), &big(4), MuVariant::AsPrinted).unwrap();
        assert!((mu0 - (5f64.sqrt() - 1.0)).abs() < 1e-12);
        let (mu0, _) = mu_exponents(3, &big(3), &big(3), MuVariant::Squared).unwrap();
        assert!((mu0 - 1.0).abs() < 1e-12);
        assert!(mu_exponents(3, &big(0), &big(1), MuVariant::Squared).is_err());
        // squared variant: u -> n from above gives mu -> 1 from above
        for n in 2..=12u32 {
            for k in 1..=40i64 {
                let u = big(n as i64) + frac(1, 10 * k);
                let (mu, _) = mu_exponents(n, &u, &u, MuVariant::Squared).unwrap();
                assert!(mu > 1.0);
                assert!(mu < 1.2);
            }
        }
    }

    #[test]
    fn weight_window_examples() {
        let w = admissible_weights(3, 2.0, 2.0, 3.0);
        assert!(w.feasible);
        let s = w.sample_point.unwrap();
        assert!(weights_admissible(2.0, 2.0, 3.0, s));

        let w = admissible_weights(3, 0.0, 2.0, 3.0);
        assert!(!w.feasible);

        let w = admissible_weights(3, 1.5, 1.5, 3.0);
        assert!(w.feasible);
        let above = weights_above_one(1.5, 1.5, 3.0).unwrap();
        assert!(above.0 > 1.0 && above.1 > 1.0);
    }

    #[test]
    fn weight_window_matches_grid_search() {
        // brute grid search as the independent feasibility oracle
        let cases: [(f64, f64, f64); 4] =
            [(2.0, 2.0, 3.0), (1.5, 1.5, 3.0), (0.4, 2.0, 0.3), (2.5, 0.7, 1.0)];
        for (mu0, mu1, gamma) in cases {
            let mut grid_feasible = false;
            for i in 1..60 {
                for j in 1..60 {
                    let g0 = mu0.min(gamma) * i as f64 / 60.0;
                    let g1 = mu1.min(gamma) * j as f64 / 60.0;
                    let alpha = 0.5 * (mu0 - g0).min(mu1 - g1);
                    if weights_admissible(mu0, mu1, gamma, (g0, g1, alpha)) {
                        grid_feasible = true;
                    }
                }
            }
            let w = admissible_weights(3, mu0, mu1, gamma);
            assert_eq!(w.feasible, grid_feasible, "mu0={mu0} mu1={mu1} gamma={gamma}");
        }
    }

    #[test]
    fn oneform_threshold_is_2n_plus_1() {
        assert_eq!(oneform_threshold(3), big(7));
        assert_eq!(oneform_threshold(10), big(21));
        for n in 2..200 {
            assert_eq!(oneform_threshold(n), big(2 * n as i64 + 1));
        }
    }

    #[test]
    fn v3_matrix_examples() {
        for n in 2..=10u32 {
            let m = build_v3_matrix(n, &big(n as i64 - 1));
            assert!(m[0][0].is_zero());
            assert!(m[0][1].is_zero());
            assert_eq!(m[1][1], big(4 * n as i64 + 4));
        }
        // n=3, mu=8: det of the shifted block = 9
        assert_eq!(v3_shifted_det(3, &big(8)), big(9));
        // positivity of the shifted block <=> mu > 2n+1, over a rational grid
        for n in 2..=8u32 {
            let bound = big(2 * n as i64 + 1);
            for num in -20..80i64 {
                let mu = frac(num, 4) + big(n as i64);
                assert_eq!(
                    v3_shifted_positive(n, &mu),
                    mu > bound,
                    "n = {n}, mu = {mu}"
                );
            }
        }
    }

    #[test]
    fn v4_matrix_examples() {
        for n in 2..=8u32 {
            let m = build_v4_matrix(n, &big(n as i64));
            assert!(m[0][0].is_zero());
            assert!(m[0][1].is_zero());
            assert!(m[0][2].is_zero());
            // a33 simplifies to n((n+1)lambda + n^2 + 3n + 2)
            for k in 0..30i64 {
                let l = frac(7 * k + 1, 7);
                let m = build_v4_matrix(n, &l);
                let ni = n as i64;
                let simplified =
                    big(ni) * (big(ni + 1) * &l + big(ni * ni + 3 * ni + 2));
                assert_eq!(m[2][2], simplified);
                assert!(m[2][2].is_positive());
            }
        }
    }

    #[test]
    fn det_identities_spot_checks() {
        let (a, b) = det_identities_check(5, &big(7));
        assert!(a && b);
        let (a, b) = det_identities_check(3, &big(4));
        assert!(a && b);
        // lambda = n: both sides of the full identity vanish
        let m = build_v4_matrix(4, &big(4));
        assert!(det3(&m).is_zero());
        let (a, b) = det_identities_check(4, &big(4));
        assert!(a && b);
    }

    #[test]
    fn scalar_cubic_examples() {
        // P(n) = 0 exactly for every n
        for n in 2..=30u32 {
            let (p, pos) = scalar_sector_condition(n, &big(n as i64));
            assert!(p.is_zero());
            assert!(!pos);
        }
        // E VI row: n = 64, lambda = 63 * 28/9 = 196, P < 0 with known value
        let (p, pos) = scalar_sector_condition(64, &big(196));
        assert!(!pos);
        assert_eq!(p, big(-278_986_752));
        // E IX row: n = 112, lambda = 111 * 16/5
        let (_, pos) = scalar_sector_condition(112, &(big(111) * frac(16, 5)));
        assert!(pos);
    }

    #[test]
    fn scalar_cubic_factorization() {
        // P factors exactly as n^2 (λ-n)(λ-(3n+6))(λ+n-2); the enclosure
        // must therefore bracket 3n+6
        for n in 2..=30u32 {
            let ni = n as i64;
            for k in 0..12i64 {
                let l = frac(6 * k - 11, 7);
                let lhs = scalar_sector_p(n, &l);
                let rhs = big(ni * ni) * (&l - big(ni)) * (&l - big(3 * ni + 6)) * (&l + big(ni - 2));
                assert_eq!(lhs, rhs);
            }
            let (lo, hi) = largest_root_enclosure(n);
            let root = big(3 * ni + 6);
            assert!(lo <= root && root <= hi);
            assert!(&hi - &lo < frac(1, 100_000_000));
            assert!(above_all_roots(n, &(root.clone() + frac(1, 7))));
            assert!(!above_all_roots(n, &root));
            assert!(!above_all_roots(n, &(root - frac(1, 7))));
        }
    }

    #[test]
    fn tangential_round_spheres() {
        for n in 2..=10u32 {
            let cs = CrossSection::round_sphere(n).unwrap();
            let (tangential, strict, _) = check_tangential(&cs).unwrap();
            assert!(tangential, "S^{n} must be tangentially stable");
            assert!(!strict, "S^{n} must not be strictly tangentially stable");
        }
    }

    #[test]
    fn tangential_witnesses() {
        let mut cs = CrossSection::round_sphere(3).unwrap();
        cs.tt_einstein_spectrum = vec![big(-1), big(2)];
        let (tangential, _, conds) = check_tangential(&cs).unwrap();
        assert!(!tangential);
        assert!(conds
            .iter()
            .any(|c| c.name == "tt_nonnegative" && !c.passed && c.witness.contains("-1")));

        let mut cs = CrossSection::round_sphere(3).unwrap();
        // insert an eigenvalue in the open interval (n, 2(n+1)) = (3, 8)
        cs.scalar_spectrum = vec![big(0), big(3), big(4), big(8), big(15)];
        let (tangential, _, _) = check_tangential(&cs).unwrap();
        assert!(!tangential);
    }

    #[test]
    fn tangential_refuses_short_spectra() {
        let mut cs = CrossSection::round_sphere(3).unwrap();
        cs.spectra_complete_below = big(5);
        assert!(matches!(
            check_tangential(&cs),
            Err(Error::InsufficientSpectralData(_))
        ));
    }

    #[test]
    fn strong_examples() {
        // TT eigenvalue exactly n fails the strict bound
        let mut cs = CrossSection::round_sphere(10).unwrap();
        cs.tt_einstein_spectrum = vec![big(10), big(40)];
        cs.spectra_complete_below = big(100);
        cs.scalar_spectrum = vec![big(0), big(60), big(90)];
        cs.coclosed_oneform_spectrum = vec![big(25)];
        let v = check_strong(&cs, MuVariant::Squared).unwrap();
        assert_eq!(v.strong, Some(false));
        assert!(v.conditions[0].witness.contains("<= n"));

        // 1-form eigenvalue exactly 2n+1 fails
        let mut cs = CrossSection::round_sphere(10).unwrap();
        cs.tt_einstein_spectrum = vec![big(15)];
        cs.coclosed_oneform_spectrum = vec![big(21)];
        cs.scalar_spectrum = vec![big(0), big(60), big(90)];
        cs.spectra_complete_below = big(100);
        let v = check_strong(&cs, MuVariant::Squared).unwrap();
        assert_eq!(v.strong, Some(false));

        // synthetic strongly stable cross-section: n = 10, TT = {15},
        // 1-forms = {25}, scalar = {0, 60}, complete well past 3n+6 = 36
        let cs = CrossSection {
            name: "synthetic".into(),
            n: 10,
            einstein_constant: big(9),
            scalar_spectrum: vec![big(0), big(60)],
            tt_einstein_spectrum: vec![big(15)],
            coclosed_oneform_spectrum: vec![big(25)],
            spectra_complete_below: big(100),
        };
        let v = check_strong(&cs, MuVariant::Squared).unwrap();
        assert_eq!(v.strong, Some(true));
        assert!(scalar_sector_p(10, &big(60)).is_positive());
    }

    #[test]
    fn strong_requires_closure_data() {
        // every listed eigenvalue passes but the certified range stops
        // below the largest root of P: refuses with insufficient data
        let cs = CrossSection {
            name: "short".into(),
            n: 10,
            einstein_constant: big(9),
            scalar_spectrum: vec![big(0), big(12)],
            tt_einstein_spectrum: vec![big(15)],
            coclosed_oneform_spectrum: vec![big(25)],
            spectra_complete_below: big(22), // < 3n+6 = 36
        };
        // P(12) at n=10: 12 is inside (n, 3n+6) so the cubic is negative,
        // verdict false rather than an error
        let v = check_strong(&cs, MuVariant::Squared).unwrap();
        assert_eq!(v.strong, Some(false));

        let cs = CrossSection {
            scalar_spectrum: vec![big(0), big(8)],
            ..cs
        };
        // P(8) > 0 (below n), but closure cannot be certified
        assert!(matches!(
            check_strong(&cs, MuVariant::Squared),
            Err(Error::InsufficientSpectralData(_))
        ));
    }

    #[test]
    fn indicial_data_from_cross_section() {
        let cs = CrossSection::round_sphere(3).unwrap();
        // u0 from the minimal TT eigenvalue shifted by 2(n-1), u1 the
        // first nonzero scalar eigenvalue
        let u0 = cs.tt_einstein_spectrum[0].clone() + big(4);
        let u1 = cs.scalar_spectrum[1].clone();
        let data = IndicialData::new(&cs, u0, u1, MuVariant::Squared).unwrap();
        assert_eq!(data.n, 3);
        assert_eq!(data.nu_of.len(), cs.scalar_spectrum.len());
        // nu(0) = (n-1)/2 = 1 heads the map
        assert_eq!(data.nu_of[0].1, 1.0);
        assert!(data.mu0 > 0.0 && data.mu1 > 0.0);
        // u1 = n on the sphere: squared variant gives mu1 = 1 exactly
        assert!((data.mu1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn strong_assumption_examples() {
        assert!(strong_assumption_check(&big(11), &big(11), 10));
        assert!(!strong_assumption_check(&big(10), &big(11), 10));
        // round sphere: u1 = n fails the strict bound
        let cs = CrossSection::round_sphere(5).unwrap();
        let u1 = cs.scalar_spectrum[1].clone();
        assert!(!strong_assumption_check(&big(100), &u1, 5));
    }

    #[test]
    fn classify_reproduces_table() {
        let mut yes = Vec::new();
        for row in builtin_table() {
            let v = classify_table_row(&row);
            assert_eq!(
                v.strong,
                Some(row.sts_verdict),
                "row {} ({})",
                row.space,
                row.family
            );
            if v.strong == Some(true) {
                yes.push(row.space.clone());
            }
        }
        assert_eq!(yes.len(), 4);
    }

    #[test]
    fn classify_witnesses() {
        let table = builtin_table();
        let e_vi = table.iter().find(|r| r.family == "E VI").unwrap();
        let v = classify_table_row(e_vi);
        assert_eq!(v.strong, Some(false));
        let scalar = v
            .conditions
            .iter()
            .find(|c| c.name == "scalar_sector_p")
            .unwrap();
        assert!(!scalar.passed);
        assert!(scalar.witness.contains("scalar sector P < 0"));

        let e8 = table.iter().find(|r| r.space == "E_8").unwrap();
        assert_eq!(classify_table_row(e8).strong, Some(true));
        let e_viii = table.iter().find(|r| r.family == "E VIII").unwrap();
        assert_eq!(classify_table_row(e_viii).strong, Some(true));
    }

    proptest! {
        #[test]
        fn nu_monotone_in_lambda(a in 0i64..4000, b in 1i64..50, n in 2u32..20) {
            let l1 = frac(a, b);
            let l2 = &l1 + frac(1, 3);
            let v1 = nu(n, &l1).unwrap();
            let v2 = nu(n, &l2).unwrap();
            prop_assert!(v2 > v1);
            prop_assert!(v1 >= (n as f64 - 1.0) / 2.0);
        }

        #[test]
        fn det_identities_hold_generically(n in 2u32..30, num in 1i64..200, den in 1i64..9) {
            // lambda in (n, 5n]
            let l = big(n as i64) + frac(num, den) * frac(4 * n as i64, 200);
            let (minor, full) = det_identities_check(n, &l);
            prop_assert!(minor);
            prop_assert!(full);
        }

        #[test]
        fn window_sample_always_admissible(
            mu0 in 0.05f64..5.0, mu1 in 0.05f64..5.0, gamma in 0.05f64..5.0
        ) {
            let w = admissible_weights(3, mu0, mu1, gamma);
            prop_assert!(w.feasible);
            let s = w.sample_point.unwrap();
            prop_assert!(weights_admissible(mu0, mu1, gamma, s));
        }
    }
}
