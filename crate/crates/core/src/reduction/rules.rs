use crate::error::{Error, Result};
use crate::linalg::{inverse_entry, is_positive_definite, svd_values};
use crate::matrix::{direct_sum, kron, multiply, ComplexMatrix, C64, ONE};
use crate::problem::{ConditionParams, ProblemInstance, ProblemKind, Threshold, Tolerances};

use super::{Bound, ReductionRecord, Rule};
use crate::problem::promise::{
    eigen_range_bounds, singular_range_bounds, max_partial_product_norm,
};

fn slack() -> f64 {
    Tolerances::default().spectral
}

/// `σ₁ ≤ hi` and `σ_min ≥ lo` bounds on a square matrix.
fn singular_bounds(a: &ComplexMatrix, name: &str, hi: f64, lo: f64) -> Result<[Bound; 2]> {
    let [(s1, c_hi), (sn, c_lo)] = singular_range_bounds(a, hi, lo, slack())?;
    Ok([
        Bound::at_most(format!("sigma_1({name})"), hi, s1).with_certificate(c_hi),
        Bound::at_least(format!("sigma_n({name})"), lo, sn).with_certificate(c_lo),
    ])
}

/// `σ₁ ≤ 1` and `λ_min ≥ lo` bounds on a Hermitian matrix.
fn positive_bounds(h: &ComplexMatrix, name: &str, lo: f64) -> [Bound; 2] {
    let [(hi, c_hi), (lmin, c_lo)] = eigen_range_bounds(h, 1.0, lo, slack());
    [
        Bound::at_most(format!("sigma_1({name})"), 1.0, hi).with_certificate(c_hi),
        Bound::at_least(format!("lambda_min({name})"), lo, lmin).with_certificate(c_lo),
    ]
}

/// `⌊1 + ln⌊x⌋⌋`, with `⌊x⌋` clamped to at least 1.
pub fn floor_one_plus_ln_floor(x: f64) -> usize {
    let f = x.floor().max(1.0);
    (1.0 + f.ln()).floor() as usize
}

/// Series length for the log-determinant construction: `⌈κ⌉⌊1+ln⌊2nκ/ε⌋⌋`.
pub fn logdet_terms(n: usize, kappa: f64, epsilon: f64) -> usize {
    kappa.ceil() as usize * floor_one_plus_ln_floor(2.0 * n as f64 * kappa / epsilon)
}

/// Series length for the inverse-entry construction: `⌈κ⌉⌊1+ln⌊4κ/ε⌋⌋`.
pub fn neumann_terms(kappa: f64, epsilon: f64) -> usize {
    kappa.ceil() as usize * floor_one_plus_ln_floor(4.0 * kappa / epsilon)
}

/// Identity padding `l̂ = ⌊1+ln⌊κ⌋⌋` of the log-determinant construction.
pub fn logdet_padding(kappa: f64) -> usize {
    floor_one_plus_ln_floor(kappa)
}

/// `Σ_r F_{m+1,r,r+1} ⊗ A_r`: the matrices on the first block superdiagonal.
fn block_superdiagonal(mats: &[ComplexMatrix]) -> ComplexMatrix {
    let n = mats[0].rows();
    let m = mats.len();
    let mut out = ComplexMatrix::zeros(n * (m + 1), n * (m + 1));
    for (r, a) in mats.iter().enumerate() {
        out.set_block(r * n, (r + 1) * n, a);
    }
    out
}

fn sigma_max(a: &ComplexMatrix) -> Result<f64> {
    Ok(svd_values(a)?.max())
}

fn one_minus(h: &ComplexMatrix) -> ComplexMatrix {
    &ComplexMatrix::identity(h.rows()) - h
}

fn params(n: usize, m: usize, kappa: f64, epsilon: f64) -> ConditionParams {
    ConditionParams {
        n,
        m,
        kappa,
        epsilon,
    }
}

fn record(
    rule: Rule,
    input: &ProblemInstance,
    output: &ProblemInstance,
    bounds: Vec<Bound>,
    answer_map: &str,
    notes: Vec<(String, f64)>,
) -> ReductionRecord {
    ReductionRecord {
        rule,
        input_params: input.params,
        output_params: output.params,
        bounds,
        answer_map: answer_map.into(),
        notes,
    }
}

fn product_to_power(inst: &ProblemInstance, rule: Rule, out_kind: ProblemKind) -> Result<(ProblemInstance, ReductionRecord)> {
    let p = inst.params;
    let (n, m) = (p.n, p.m);
    let a = block_superdiagonal(&inst.matrices);
    let out = ProblemInstance {
        kind: out_kind,
        params: params(n * (m + 1), m, p.kappa, p.epsilon),
        matrices: vec![a.clone()],
        s: inst.s,
        t: n * m + inst.t,
        pairs: vec![],
        b: inst.b,
    };
    let mut bounds = Vec::with_capacity(m);
    let mut pw = a.clone();
    for j in 1..=m {
        if j > 1 {
            pw = multiply(&pw, &a)?;
        }
        bounds.push(Bound::at_most(format!("sigma_1(A^{j})"), p.kappa, sigma_max(&pw)?));
    }
    let rec = record(rule, inst, &out, bounds, "b' = b", vec![]);
    Ok((out, rec))
}

pub fn reduce_itmatprod_to_matpow(inst: &ProblemInstance) -> Result<(ProblemInstance, ReductionRecord)> {
    expect_kind(inst, ProblemKind::ItMatProd, Rule::ItMatProdToMatPow)?;
    product_to_power(inst, Rule::ItMatProdToMatPow, ProblemKind::MatPow)
}

pub fn reduce_vitmatprod_to_vmatpow(inst: &ProblemInstance) -> Result<(ProblemInstance, ReductionRecord)> {
    expect_kind(inst, ProblemKind::VItMatProd, Rule::VItMatProdToVMatPow)?;
    product_to_power(inst, Rule::VItMatProdToVMatPow, ProblemKind::VMatPow)
}

fn power_to_inverse(inst: &ProblemInstance, rule: Rule, out_kind: ProblemKind) -> Result<(ProblemInstance, ReductionRecord)> {
    let p = inst.params;
    let (n, m) = (p.n, p.m);
    let c = (1.0 + p.kappa).ceil();
    let mut g1 = ComplexMatrix::zeros(m + 1, m + 1);
    for r in 0..m {
        g1[(r, r + 1)] = ONE;
    }
    let y = kron(&g1, inst.matrix());
    let z = &ComplexMatrix::identity(n * (m + 1)) - &y;
    let zh = z.scale_real(1.0 / c);
    let kappa_out = (1.0 + m as f64 * p.kappa) * c;
    let b = match inst.b {
        Threshold::Real(b) => Threshold::Real(c * b),
        Threshold::Complex(b) => Threshold::Complex(b * c),
        Threshold::None => Threshold::None,
    };
    let out = ProblemInstance {
        kind: out_kind,
        params: params(n * (m + 1), 1, kappa_out, c * p.epsilon),
        matrices: vec![zh.clone()],
        s: inst.s,
        t: n * m + inst.t,
        pairs: vec![],
        b,
    };
    let [hi, lo] = singular_bounds(&zh, "Z'", 1.0, 1.0 / kappa_out)?;
    let inv_norm = Bound::at_most("sigma_1(Z^-1)", 1.0 + m as f64 * p.kappa, 1.0 / (c * lo.measured))
        .with_certificate(lo.certified);
    let bounds = vec![hi, lo, inv_norm];
    let rec = record(rule, inst, &out, bounds, "b' = ceil(1 + kappa) * b", vec![("c".into(), c)]);
    Ok((out, rec))
}

pub fn reduce_matpow_to_matinv(inst: &ProblemInstance) -> Result<(ProblemInstance, ReductionRecord)> {
    expect_kind(inst, ProblemKind::MatPow, Rule::MatPowToMatInv)?;
    power_to_inverse(inst, Rule::MatPowToMatInv, ProblemKind::MatInv)
}

pub fn reduce_vmatpow_to_vmatinv(inst: &ProblemInstance) -> Result<(ProblemInstance, ReductionRecord)> {
    expect_kind(inst, ProblemKind::VMatPow, Rule::VMatPowToVMatInv)?;
    power_to_inverse(inst, Rule::VMatPowToVMatInv, ProblemKind::VMatInv)
}

pub fn reduce_matinv_to_posmatinv(inst: &ProblemInstance) -> Result<(ProblemInstance, ReductionRecord)> {
    expect_kind(inst, ProblemKind::MatInv, Rule::MatInvToPosMatInv)?;
    let p = inst.params;
    let n = p.n;
    let a = inst.matrix();
    let ad = a.adjoint();
    let mut h = ComplexMatrix::zeros(2 * n, 2 * n);
    h.set_block(0, 0, &multiply(&ad, a)?);
    h.set_block(0, n, &(-&ad));
    h.set_block(n, 0, &(-a));
    h.set_block(n, n, &ComplexMatrix::identity(n).scale_real(2.0));
    let h = h.scale_real(1.0 / 3.0);
    let h = (&h + &h.adjoint()).scale_real(0.5);
    let kappa_out = (3.0 * p.kappa).powi(2);
    let out = ProblemInstance {
        kind: ProblemKind::MatInvPos,
        params: params(2 * n, 1, kappa_out, 3.0 * p.epsilon),
        matrices: vec![h.clone()],
        s: inst.s,
        t: inst.t + n,
        pairs: vec![],
        b: scale_real_threshold(inst.b, 3.0),
    };
    let bounds = positive_bounds(&h, "H", 1.0 / kappa_out).to_vec();
    let rec = record(Rule::MatInvToPosMatInv, inst, &out, bounds, "b' = 3b (magnitudes compared)", vec![]);
    Ok((out, rec))
}

pub fn reduce_posdet_to_sumitmatprod(inst: &ProblemInstance) -> Result<(ProblemInstance, ReductionRecord)> {
    expect_kind(inst, ProblemKind::DetPos, Rule::PosDetToSumItMatProd)?;
    let p = inst.params;
    let n = p.n;
    let h = inst.matrix();
    if !is_positive_definite(h) {
        return Err(Error::Precondition("H is not positive definite".into()));
    }
    let l = logdet_padding(p.kappa);
    let mh = logdet_terms(n, p.kappa, p.epsilon);
    let r = one_minus(h);
    let dim = n * (l + mh);
    let mut mats = Vec::with_capacity(mh);
    let d = ComplexMatrix::diag_real(&(1..=mh).map(|k| -1.0 / k as f64).collect::<Vec<_>>());
    mats.push(direct_sum(&[ComplexMatrix::identity(n * l), kron(&d, &r)])?);
    for k in 2..=mh {
        mats.push(direct_sum(&[
            ComplexMatrix::identity(n * (l + k - 1)),
            kron(&ComplexMatrix::identity(mh + 1 - k), &r),
        ])?);
    }
    let b = inst.b.real().unwrap_or(0.0);
    let out = ProblemInstance {
        kind: ProblemKind::SumItMatProd,
        params: params(dim, mh, 1.0, p.epsilon / 2.0),
        matrices: mats,
        s: 0,
        t: 0,
        pairs: (0..dim).map(|i| (i, i)).collect(),
        b: Threshold::Real(n as f64 * l as f64 + b),
    };
    let bounds = vec![Bound::at_most(
        "sigma_1(A_{j1,j2}) over all partial products",
        1.0,
        max_partial_product_norm(&out.matrices),
    )];
    let rec = record(
        Rule::PosDetToSumItMatProd,
        inst,
        &out,
        bounds,
        "b' = n*l + b",
        vec![("l".into(), l as f64), ("m".into(), mh as f64)],
    );
    Ok((out, rec))
}

pub fn reduce_itmatprod_to_nonneg(inst: &ProblemInstance) -> Result<(ProblemInstance, ReductionRecord)> {
    expect_kind(inst, ProblemKind::ItMatProd, Rule::ItMatProdToNonneg)?;
    let p = inst.params;
    let (n, m) = (p.n, p.m);
    let mut mats = inst.matrices.clone();
    mats.push(ComplexMatrix::unit(n, inst.t, inst.t));
    mats.extend(inst.matrices.iter().rev().map(|a| a.adjoint()));
    let b = inst.b.real().unwrap_or(0.0);
    let kappa_out = p.kappa * p.kappa;
    let out = ProblemInstance {
        kind: ProblemKind::ItMatProdNonneg,
        params: params(n, 2 * m + 1, kappa_out, p.epsilon * p.epsilon),
        matrices: mats,
        s: inst.s,
        t: inst.s,
        pairs: vec![],
        b: Threshold::Real(b * b),
    };
    let bounds = vec![Bound::at_most(
        "sigma_1(A_{j1,j2}) over all partial products",
        kappa_out,
        max_partial_product_norm(&out.matrices),
    )];
    let rec = record(Rule::ItMatProdToNonneg, inst, &out, bounds, "b' = b^2", vec![]);
    Ok((out, rec))
}

pub fn reduce_nonneg_itmatprod_to_det(inst: &ProblemInstance) -> Result<(ProblemInstance, ReductionRecord)> {
    expect_kind(inst, ProblemKind::ItMatProdNonneg, Rule::NonnegToDet)?;
    let p = inst.params;
    let (n, m) = (p.n, p.m);
    let dim = n * (m + 1);
    let y = block_superdiagonal(&inst.matrices);
    let mut c = &ComplexMatrix::identity(dim) - &y;
    c[(n * m + inst.t, inst.s)] += ONE;
    let l = floor_one_plus_ln_floor(2.0 + p.kappa);
    let ch = c.scale_real((-(l as f64)).exp());
    let b = inst.b.real().unwrap_or(0.0);
    let kappa_out = (2.0 + m as f64 * p.kappa).powi(3);
    let out = ProblemInstance {
        kind: ProblemKind::Det,
        params: params(dim, 1, kappa_out, p.epsilon / (2.0 + 2.0 * p.kappa)),
        matrices: vec![ch.clone()],
        s: 0,
        t: 0,
        pairs: vec![],
        b: Threshold::Real((1.0 + b).ln() - l as f64 * dim as f64),
    };
    let bounds = singular_bounds(&ch, "C'", 1.0, 1.0 / kappa_out)?.to_vec();
    let rec = record(
        Rule::NonnegToDet,
        inst,
        &out,
        bounds,
        "b' = ln(1 + b) - l*(nm + n)",
        vec![("l".into(), l as f64)],
    );
    Ok((out, rec))
}

pub fn reduce_det_to_posdet(inst: &ProblemInstance) -> Result<(ProblemInstance, ReductionRecord)> {
    expect_kind(inst, ProblemKind::Det, Rule::DetToPosDet)?;
    let p = inst.params;
    let a = inst.matrix();
    let h = multiply(a, &a.adjoint())?;
    let h = (&h + &h.adjoint()).scale_real(0.5);
    let kappa_out = p.kappa * p.kappa;
    let out = ProblemInstance {
        kind: ProblemKind::DetPos,
        params: params(p.n, 1, kappa_out, p.epsilon / 2.0),
        matrices: vec![h.clone()],
        s: 0,
        t: 0,
        pairs: vec![],
        b: scale_real_threshold(inst.b, 2.0),
    };
    let bounds = positive_bounds(&h, "H", 1.0 / kappa_out).to_vec();
    let rec = record(
        Rule::DetToPosDet,
        inst,
        &out,
        bounds,
        "b' = 2b",
        vec![("realized gap".into(), 2.0 * p.epsilon)],
    );
    Ok((out, rec))
}

pub fn reduce_posmatinv_to_sumitmatprod(inst: &ProblemInstance) -> Result<(ProblemInstance, ReductionRecord)> {
    expect_kind(inst, ProblemKind::MatInvPos, Rule::PosMatInvToSumItMatProd)?;
    let p = inst.params;
    let n = p.n;
    let mh = neumann_terms(p.kappa, p.epsilon);
    let r = one_minus(inst.matrix());
    let mats = (1..=mh)
        .map(|j| {
            direct_sum(&[
                ComplexMatrix::identity(j * n),
                kron(&ComplexMatrix::identity(mh - j + 1), &r),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    let dim = n * (mh + 1);
    let b = inst.b.real().unwrap_or(0.0);
    let out = ProblemInstance {
        kind: ProblemKind::SumItMatProd,
        params: params(dim, mh.max(1), 1.0, p.epsilon / 2.0),
        matrices: if mh == 0 { vec![ComplexMatrix::identity(dim)] } else { mats },
        s: 0,
        t: 0,
        pairs: (0..=mh).map(|j| (inst.s + j * n, inst.t + j * n)).collect(),
        b: Threshold::Real((b - p.epsilon / 4.0).max(0.0)),
    };
    let bounds = vec![Bound::at_most(
        "sigma_1(A_{j1,j2}) over all partial products",
        1.0,
        max_partial_product_norm(&out.matrices),
    )];
    let rec = record(
        Rule::PosMatInvToSumItMatProd,
        inst,
        &out,
        bounds,
        "b' = max(0, b - epsilon/4)",
        vec![("m".into(), mh as f64)],
    );
    Ok((out, rec))
}

/// Permutation matrix exchanging indices 0 and `i`.
fn swap_with_first(n: usize, i: usize) -> ComplexMatrix {
    let mut p = ComplexMatrix::identity(n);
    if i != 0 {
        p[(0, 0)] = C64::new(0.0, 0.0);
        p[(i, i)] = C64::new(0.0, 0.0);
        p[(0, i)] = ONE;
        p[(i, 0)] = ONE;
    }
    p
}

pub fn reduce_sumitmatprod_to_itmatprod(inst: &ProblemInstance) -> Result<(ProblemInstance, ReductionRecord)> {
    expect_kind(inst, ProblemKind::SumItMatProd, Rule::SumItMatProdToItMatProd)?;
    let p = inst.params;
    let (n, m) = (p.n, p.m);
    let k = inst.pairs.len();
    if k == 0 {
        return Err(Error::InvalidParams("E is empty".into()));
    }
    let mut mats = Vec::with_capacity(m + 2);
    let mut r = ComplexMatrix::identity(k);
    for c in 0..k {
        r[(0, c)] = ONE;
    }
    let a0 = kron(&r, &ComplexMatrix::identity(n));
    mats.push(a0.clone());
    for j in 0..m {
        let blocks = inst
            .pairs
            .iter()
            .map(|&(s, t)| {
                let mut b = inst.matrices[j].clone();
                if j == 0 {
                    b = multiply(&swap_with_first(n, s), &b)?;
                }
                if j == m - 1 {
                    b = multiply(&b, &swap_with_first(n, t))?;
                }
                Ok(b)
            })
            .collect::<Result<Vec<_>>>()?;
        mats.push(direct_sum(&blocks)?);
    }
    mats.push(a0.adjoint());
    let kappa_out = 2.0 * k as f64 * p.kappa;
    let out = ProblemInstance {
        kind: ProblemKind::ItMatProd,
        params: params(n * k, m + 2, kappa_out, p.epsilon),
        matrices: mats,
        s: 0,
        t: 0,
        pairs: vec![],
        b: inst.b,
    };
    let bounds = vec![
        Bound::at_most("sigma_1(A_0)", (2.0 * k as f64).sqrt(), sigma_max(&a0)?),
        Bound::at_most(
            "sigma_1(A_{j1,j2}) over all partial products",
            kappa_out,
            max_partial_product_norm(&out.matrices),
        ),
    ];
    let rec = record(Rule::SumItMatProdToItMatProd, inst, &out, bounds, "b' = b", vec![]);
    Ok((out, rec))
}

/// Lower bound on `σ_min` of the SINGULAR gadget for a given `|A⁻¹[s,t] − b|`.
pub fn singular_gap_bound(kappa: f64, distance: f64) -> f64 {
    let k = kappa.ceil();
    distance / (6.0 * k * (k + 1.0) * (k + 1.0))
}

pub fn reduce_vmatinv_to_singular(inst: &ProblemInstance) -> Result<(ProblemInstance, ReductionRecord)> {
    expect_kind(inst, ProblemKind::VMatInv, Rule::VMatInvToSingular)?;
    let p = inst.params;
    let n = p.n;
    let b = inst.b.complex().unwrap_or_default();
    if b.norm() > p.kappa {
        return Err(Error::Precondition(format!("|b| = {} exceeds kappa = {}", b.norm(), p.kappa)));
    }
    let k = p.kappa.ceil();
    let tail = ONE / (ONE - b / (2.0 * k));
    let mut c = direct_sum(&[inst.matrix().scale_real(2.0 * k), ComplexMatrix::scalar(tail)])?;
    // Ĉ = B̂ − v u† with u = e_s + e_n, v = e_t + e_n.
    for &row in &[inst.t, n] {
        for &col in &[inst.s, n] {
            c[(row, col)] -= ONE;
        }
    }
    let d = 1.0 / (2.0 * k + 2.0);
    let mut h = ComplexMatrix::zeros(2 * n + 2, 2 * n + 2);
    h.set_block(0, n + 1, &c.scale_real(d));
    h.set_block(n + 1, 0, &c.adjoint().scale_real(d));
    let eps_out = singular_gap_bound(p.kappa, p.epsilon);
    let out = ProblemInstance {
        kind: ProblemKind::Singular,
        params: params(2 * n + 2, 1, 1.0, eps_out),
        matrices: vec![h.clone()],
        s: 0,
        t: 0,
        pairs: vec![],
        b: Threshold::None,
    };
    let s = svd_values(&h)?;
    let dist = (inverse_entry(inst.matrix(), inst.s, inst.t)? - b).norm();
    let bounds = vec![
        Bound::at_most("sigma_1(H)", 1.0, s.max()),
        Bound::at_least("sigma_min(H)", singular_gap_bound(p.kappa, dist), s.min()),
    ];
    let rec = record(
        Rule::VMatInvToSingular,
        inst,
        &out,
        bounds,
        "One iff sigma_min(H) = 0",
        vec![
            ("d".into(), d),
            ("|A^-1[s,t] - b|".into(), dist),
            ("unscaled gap constant".into(), 2.0 / (5f64.sqrt() * k * (2.0 * k + 1.0).powi(2))),
        ],
    );
    Ok((out, rec))
}

fn scale_real_threshold(b: Threshold, k: f64) -> Threshold {
    match b {
        Threshold::Real(b) => Threshold::Real(k * b),
        other => other,
    }
}

fn expect_kind(inst: &ProblemInstance, kind: ProblemKind, rule: Rule) -> Result<()> {
    if inst.kind == kind {
        Ok(())
    } else {
        Err(Error::KindMismatch {
            rule: rule.name().into(),
            expected: kind.name().into(),
            found: inst.kind.name().into(),
        })
    }
}
