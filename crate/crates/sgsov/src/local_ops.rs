//! Reconstruction of local operators from the Yang-Baxter generators,
//! SOV representations of B^{-1}A monomials, q-combinatorics and the
//! elementary-operator algebra.

use crate::linalg::{eye, fro, inverse, matpow, rank};
use crate::model_core::{inverse_unitary, site_embed_raw, Entry, ModelParams, Monodromy};
use crate::scalar::{abs, c, dd, floor_tol, one, pow, zero, Cx, Mat, Real};
use crate::sov_basis::{index_of, SovBasis};
use crate::{Result, SgError};
use nalgebra::{DMatrix, DVector};

/// M^{(n)}(lambda) = L_{n-1} ... L_1 L_N ... L_n.
#[derive(Clone, Debug)]
pub struct ShiftedMonodromy<R: Real> {
    pub n: usize,
    pub mono: Monodromy<R>,
}

pub fn shifted_monodromy<R: Real>(params: &ModelParams<R>, n: usize) -> Result<ShiftedMonodromy<R>> {
    if n == 0 || n > params.n {
        return Err(SgError::IndexOutOfRange(format!("site {n} not in 1..={}", params.n)));
    }
    let order: Vec<usize> = (n..=params.n).chain(1..n).collect();
    Ok(ShiftedMonodromy { n, mono: params.ordered_monodromy(&order) })
}

/// X^{-1} Y evaluated at lambda.
fn left_quotient<R: Real>(x: &Mat<R>, y: &Mat<R>) -> Result<Mat<R>> {
    Ok(inverse(x)? * y)
}

pub fn binv_a<R: Real>(mono: &Monodromy<R>, lambda: Cx<R>) -> Result<Mat<R>> {
    left_quotient(&mono.b.eval(lambda), &mono.a.eval(lambda))
}

/// (B^{(n)})^{-1} A^{(n)} (mu_{n,+}) raised to k.
pub fn reconstruct_u<R: Real>(params: &ModelParams<R>, n: usize, k: i64) -> Result<Mat<R>> {
    let sm = shifted_monodromy(params, n)?;
    matpow(&binv_a(&sm.mono, params.mu_plus(n))?, k)
}

/// (D^{(n)})^{-1} C^{(n)} (mu_{n,+}).
pub fn reconstruct_u_dc<R: Real>(params: &ModelParams<R>, n: usize) -> Result<Mat<R>> {
    let sm = shifted_monodromy(params, n)?;
    let l = params.mu_plus(n);
    left_quotient(&sm.mono.d.eval(l), &sm.mono.c.eval(l))
}

/// Both reconstructions of alpha_{0,n}: (A^{-1}B, C^{-1}D) at mu_{n,-}.
pub fn reconstruct_alpha<R: Real>(params: &ModelParams<R>, n: usize) -> Result<(Mat<R>, Mat<R>)> {
    let sm = shifted_monodromy(params, n)?;
    let l = params.mu_minus(n);
    let ab = left_quotient(&sm.mono.a.eval(l), &sm.mono.b.eval(l))?;
    let cd = left_quotient(&sm.mono.c.eval(l), &sm.mono.d.eval(l))?;
    Ok((ab, cd))
}

/// Applies f to the diagonal of the embedded v_n (v_n is diagonal).
fn diag_fn<R: Real, F: Fn(Cx<R>) -> Cx<R>>(params: &ModelParams<R>, n: usize, f: F) -> Mat<R> {
    let (_, v) = params.local_uv(n);
    DMatrix::from_diagonal(&DVector::from_iterator(v.nrows(), (0..v.nrows()).map(|i| f(v[(i, i)]))))
}

/// ((q^{-1} v^2 + kappa^2)/(q^{-1} v^2 kappa^2 + 1)) u^{-1}.
pub fn alpha_expected<R: Real>(params: &ModelParams<R>, n: usize) -> Mat<R> {
    let k2 = params.kappa[n - 1] * params.kappa[n - 1];
    let qi = params.qp(-1);
    let (u, _) = params.local_uv(n);
    diag_fn(params, n, |v| (qi * v * v + k2) / (qi * v * v * k2 + one::<R>())) * inverse_unitary(&u)
}

/// beta_{k,n} = X^k alpha X^{1-k}, X = B^{-1}A(mu_{n,+}), alpha = A^{-1}B(mu_{n,-}).
pub fn reconstruct_beta<R: Real>(params: &ModelParams<R>, n: usize, k: i64) -> Result<Mat<R>> {
    let sm = shifted_monodromy(params, n)?;
    let x = binv_a(&sm.mono, params.mu_plus(n))?;
    let l = params.mu_minus(n);
    let alpha = left_quotient(&sm.mono.a.eval(l), &sm.mono.b.eval(l))?;
    Ok(matpow(&x, k)? * alpha * matpow(&x, 1 - k)?)
}

/// (q^{2k-1} v^2 + kappa^2)/(q^{2k-1} v^2 kappa^2 + 1).
pub fn beta_expected<R: Real>(params: &ModelParams<R>, n: usize, k: i64) -> Mat<R> {
    let k2 = params.kappa[n - 1] * params.kappa[n - 1];
    let qk = params.qp(2 * k - 1);
    diag_fn(params, n, |v| (qk * v * v + k2) / (qk * v * v * k2 + one::<R>()))
}

/// Sum_{a<p} beta_{a,n} from the reconstruction with two scalars: the printed
/// (p v^{2p} kappa^{2(p-1)} + kappa^2)/(v^{2p} kappa^{2p} + 1) and the value
/// p (v^{2p} kappa^{2(p-1)} + kappa^2)/(v^{2p} kappa^{2p} + 1) obtained by summing the expansion of beta.
#[derive(Clone, Debug)]
pub struct BetaSumRule<R: Real> {
    pub sum: Mat<R>,
    pub printed: Cx<R>,
    pub derived: Cx<R>,
}

impl<R: Real> BetaSumRule<R> {
    pub fn printed_error(&self) -> f64 {
        rel_err(&self.sum, &(eye::<R>(self.sum.nrows()) * self.printed))
    }

    pub fn derived_error(&self) -> f64 {
        rel_err(&self.sum, &(eye::<R>(self.sum.nrows()) * self.derived))
    }
}

pub fn beta_sum_rule<R: Real>(params: &ModelParams<R>, n: usize) -> Result<BetaSumRule<R>> {
    let p = params.p as i64;
    let mut sum = DMatrix::zeros(params.dim(), params.dim());
    for a in 0..p {
        sum += reconstruct_beta(params, n, a)?;
    }
    let k = params.kappa[n - 1];
    let v2p = pow(params.v[n - 1], 2 * p);
    let pc = c::<R>(p as f64, 0.0);
    let den = v2p * pow(k, 2 * p) + one::<R>();
    let printed = (pc * v2p * pow(k, 2 * (p - 1)) + k * k) / den;
    let derived = pc * (v2p * pow(k, 2 * (p - 1)) + k * k) / den;
    Ok(BetaSumRule { sum, printed, derived })
}

/// v_n^{2k} from the discrete Fourier combination of the beta_{a,n}, 1 <= k <= p-1.
pub fn reconstruct_v2k<R: Real>(params: &ModelParams<R>, n: usize, k: i64) -> Result<Mat<R>> {
    let p = params.p as i64;
    if k < 1 || k >= p {
        return Err(SgError::IndexOutOfRange(format!("k = {k} not in 1..{p}")));
    }
    let kap = params.kappa[n - 1];
    let k2 = kap * kap;
    let den = k2 - one::<R>() / k2;
    if abs(den) < floor_tol::<R>(1e-12) {
        return Err(SgError::DegenerateKappa(n));
    }
    let v2p = pow(params.v[n - 1], 2 * p);
    let sign = if k % 2 == 0 { one::<R>() } else { -one::<R>() };
    let pref = sign * (v2p * pow(kap, 2 * p) + one::<R>()) / (c::<R>(p as f64, 0.0) * pow(kap, 2 * k) * den);
    let mut out = DMatrix::zeros(params.dim(), params.dim());
    for a in 0..p {
        out += reconstruct_beta(params, n, a)? * params.qp(-k * (2 * a - 1));
    }
    Ok(out * pref)
}

/// v_n^j for any 1 <= j <= p-1; odd j uses v^j = v^{j+p} / v^p with v^p central.
pub fn reconstruct_v_power<R: Real>(params: &ModelParams<R>, n: usize, j: i64) -> Result<Mat<R>> {
    let p = params.p as i64;
    if j % 2 == 0 {
        reconstruct_v2k(params, n, j / 2)
    } else {
        Ok(reconstruct_v2k(params, n, (j + p) / 2)? / pow(params.v[n - 1], p))
    }
}

/// Embedded u_n^j v_n^k, the dense reference for reconstructions.
pub fn local_monomial<R: Real>(params: &ModelParams<R>, n: usize, j: i64, k: i64) -> Mat<R> {
    let (u, v) = params.weyl(n);
    let uj = matpow(&u, j).expect("unitary");
    let vk = matpow(&v, k).expect("unitary");
    site_embed_raw(params.n, params.p, n, &(uj * vk))
}

/// Rank of {u_n^j v_n^{2k}} (j, k < p) built from the reconstructed operators.
pub fn spanning_rank<R: Real>(params: &ModelParams<R>, n: usize) -> Result<usize> {
    let p = params.p as i64;
    let d = params.dim();
    let x = reconstruct_u(params, n, 1)?;
    let mut us = vec![eye::<R>(d)];
    for j in 1..p {
        us.push(&us[(j - 1) as usize] * &x);
    }
    let mut vs = vec![eye::<R>(d)];
    for k in 1..p {
        vs.push(reconstruct_v2k(params, n, k)?);
    }
    let mut m = DMatrix::zeros(d * d, (p * p) as usize);
    let mut col = 0;
    for u in &us {
        for v in &vs {
            let prod = u * v;
            for (i, z) in prod.iter().enumerate() {
                m[(i, col)] = *z;
            }
            col += 1;
        }
    }
    Ok(rank(&m, floor_tol::<R>(1e-9)))
}

/// [a] = (q^a - q^{-a})/(q - q^{-1}).
pub fn q_number<R: Real>(q: Cx<R>, a: i64) -> Cx<R> {
    (pow(q, a) - pow(q, -a)) / (q - one::<R>() / q)
}

pub fn q_factorial<R: Real>(q: Cx<R>, k: i64) -> Cx<R> {
    (1..=k).fold(one(), |acc, a| acc * q_number(q, a))
}

/// q-binomial by the recursion [n;m] = q^{-m}[n-1;m] + q^{n-m}[n-1;m-1],
/// finite at roots of unity.
pub fn q_binomial<R: Real>(q: Cx<R>, n: i64, m: i64) -> Cx<R> {
    if m < 0 || m > n {
        return zero();
    }
    let n = n as usize;
    let mut row = vec![one::<R>()];
    for nn in 1..=n {
        let mut next = vec![zero::<R>(); nn + 1];
        for mm in 0..=nn {
            let a = if mm < nn { pow(q, -(mm as i64)) * row[mm] } else { zero() };
            let b = if mm > 0 { pow(q, (nn - mm) as i64) * row[mm - 1] } else { zero() };
            next[mm] = a + b;
        }
        row = next;
    }
    row[m as usize]
}

/// [k; alpha_1, ..., alpha_n] as a product of q-binomials; alpha must sum to k.
pub fn q_multinomial<R: Real>(q: Cx<R>, k: i64, alpha: &[i64]) -> Cx<R> {
    let mut rem = k;
    let mut out = one::<R>();
    for &a in alpha {
        out *= q_binomial(q, rem, a);
        rem -= a;
    }
    if rem != 0 {
        return zero();
    }
    out
}

/// Both sides of sum_a [alpha_a] prod_{i != a} (q^{al_a} eta_i/eta_a - ...)/(q^{al_a - al_i} eta_i/eta_a - ...) = [sum alpha].
pub fn q_sum_identity<R: Real>(q: Cx<R>, alpha: &[i64], eta: &[Cx<R>]) -> (Cx<R>, Cx<R>) {
    let mut lhs = zero::<R>();
    for a in 0..alpha.len() {
        let mut t = q_number(q, alpha[a]);
        for i in 0..alpha.len() {
            if i != a {
                t *= dd(pow(q, alpha[a]) * eta[i], eta[a]) / dd(pow(q, alpha[a] - alpha[i]) * eta[i], eta[a]);
            }
        }
        lhs += t;
    }
    (lhs, q_number(q, alpha.iter().sum()))
}

/// All compositions of k into n nonnegative parts.
pub fn compositions(k: i64, n: usize) -> Vec<Vec<i64>> {
    if n == 1 {
        return vec![vec![k]];
    }
    let mut out = vec![];
    for i in 0..=k {
        for mut rest in compositions(k - i, n - 1) {
            rest.insert(0, i);
            out.push(rest);
        }
    }
    out
}

fn lowered(k: &[usize], alpha: &[i64], p: usize) -> Vec<usize> {
    let mut out = k.to_vec();
    for (j, a) in alpha.iter().enumerate() {
        out[j] = (k[j] as i64 - a).rem_euclid(p as i64) as usize;
    }
    out
}

/// Shift-sum weight of the multinomial term alpha at SOV point eta, spectral parameter lambda.
fn shift_weight<R: Real>(params: &ModelParams<R>, eta: &[Cx<R>], alpha: &[i64], lambda: Cx<R>, extra: Option<usize>) -> Cx<R> {
    let q = params.q();
    let mut w = one::<R>();
    for j in 0..eta.len() {
        for h in 0..alpha[j] {
            w *= params.coeff_a(eta[j] * pow(q, -h)) / dd(lambda * pow(q, h), eta[j]);
        }
        let dj = alpha[j] + i64::from(extra == Some(j));
        for i in 0..eta.len() {
            if i == j {
                continue;
            }
            for h in (alpha[i] - dj + 1)..=alpha[i] {
                w /= dd(eta[j] * pow(q, h), eta[i]);
            }
        }
    }
    w
}

/// SOV matrix of (B^{-1}(lambda) A(lambda))^k from the multinomial shift sum (odd chains).
pub fn binv_a_power_sov<R: Real>(basis: &SovBasis<R>, k: i64, lambda: Cx<R>) -> Result<Mat<R>> {
    let pr = &basis.params;
    if pr.e_n() == 1 {
        return Err(SgError::EvenChain);
    }
    let q = pr.q();
    let d = basis.dim();
    let kk = pow(pr.k_const(), -k);
    let comps = compositions(k, pr.nn());
    let mut g = DMatrix::zeros(d, d);
    for (i, lab) in basis.labels().enumerate() {
        let eta: Vec<Cx<R>> = (0..pr.nn()).map(|a| basis.eta(a, lab[a] as i64)).collect();
        for al in &comps {
            let m = q_multinomial(q, k, al);
            if abs(m) < floor_tol::<R>(1e-12) {
                continue;
            }
            let j = index_of(&lowered(&lab, al, pr.p), pr.p);
            g[(i, j)] += kk * m * shift_weight(pr, &eta, al, lambda, None);
        }
    }
    Ok(g)
}

/// SOV matrix of the dense (B^{-1}A)^k.
pub fn binv_a_power_dense_sov<R: Real>(basis: &SovBasis<R>, k: i64, lambda: Cx<R>) -> Result<Mat<R>> {
    Ok(basis.sov_matrix(&matpow(&binv_a(&basis.mono, lambda)?, k)?))
}

/// B(Lambda)^{-1} A(Lambda) from the averages, Lambda = lambda^p.
pub fn binv_a_central<R: Real>(params: &ModelParams<R>, lambda: Cx<R>) -> Cx<R> {
    let big = pow(lambda, params.p as i64);
    params.average_value(Entry::A, big) / params.average_value(Entry::B, big)
}

/// SOV matrix of v_1^{2k} from the shift-sum corollary (odd chains, site 1).
pub fn v2k_sov<R: Real>(basis: &SovBasis<R>, k: i64) -> Result<Mat<R>> {
    let pr = &basis.params;
    if pr.e_n() == 1 {
        return Err(SgError::EvenChain);
    }
    let p = pr.p as i64;
    let q = pr.q();
    let kap = pr.kappa[0];
    let k2 = kap * kap;
    let (mup, mum) = (pr.mu_plus(1), pr.mu_minus(1));
    let den = k2 - one::<R>() / k2;
    if abs(den) < floor_tol::<R>(1e-12) {
        return Err(SgError::DegenerateKappa(1));
    }
    let sign = if k % 2 == 0 { one::<R>() } else { -one::<R>() };
    let v2p = pow(pr.v[0], 2 * p);
    let pref = sign * (v2p * pow(kap, 2 * p) + one::<R>()) / (c::<R>(p as f64, 0.0) * pow(kap, 2 * k) * den);
    let kp = pow(pr.k_const(), -p);
    let mut v0 = zero::<R>();
    for r in 1..=p {
        v0 += pow(q, -k * (2 * r - 1)) * (pow(q, r) - pow(q, -r)) / (pow(q, r) * k2 - pow(q, -r) / k2);
    }
    v0 *= pref;
    let d = basis.dim();
    let nn = pr.nn();
    let comps = compositions(p - 1, nn);
    let mut g = DMatrix::zeros(d, d);
    for (i, lab) in basis.labels().enumerate() {
        g[(i, i)] += v0;
        let eta: Vec<Cx<R>> = (0..nn).map(|a| basis.eta(a, lab[a] as i64)).collect();
        for a in 0..nn {
            for al in &comps {
                let m = q_multinomial(q, p - 1, al);
                if abs(m) < floor_tol::<R>(1e-12) {
                    continue;
                }
                let cf = m * shift_weight(pr, &eta, al, mum, Some(a));
                let mut vs = zero::<R>();
                for r in 1..=p {
                    let mut t = pow(q, -k * (2 * r - 1)) * den * pr.coeff_a(eta[a] * pow(q, -al[a]))
                        / ((pow(q, r) * k2 - pow(q, -r) / k2) * dd(mup * pow(q, al[a] + r), eta[a]));
                    for j in 0..nn {
                        let sh = al[j] + i64::from(j == a);
                        for h in 0..r {
                            t *= dd(mup * pow(q, sh + h), eta[j]) / dd(mup * pow(q, h), eta[j]);
                        }
                    }
                    vs += t;
                }
                let mut tot = al.clone();
                tot[a] += 1;
                let j = index_of(&lowered(&lab, &tot, pr.p), pr.p);
                g[(i, j)] += cf * vs * pref * kp;
            }
        }
    }
    Ok(g)
}

/// O_{a,k} = B(eta^{(k+p-1)}) ... B(eta^{(k+1)}) A(eta^{(k)}) / (p eta_N^{e_N (p-1)} K^{p-1} prod_{b != a}(Z_a/Z_b - Z_b/Z_a)),
/// with eta_N the diagonal SOV operator.
#[derive(Clone, Debug)]
pub struct ElementaryOps<R: Real> {
    /// ops[a][k]
    pub ops: Vec<Vec<Mat<R>>>,
    pub eta_n: Mat<R>,
    pub eta_n_inv: Mat<R>,
    pub eta_a: Mat<R>,
    pub eta_a_inv: Mat<R>,
    pub theta: Option<Mat<R>>,
}

impl<R: Real> ElementaryOps<R> {
    pub fn build(basis: &SovBasis<R>) -> Self {
        let pr = &basis.params;
        let p = pr.p as i64;
        let nn = pr.nn();
        let eta_n = basis.eta_n_operator();
        let eta_n_inv = if pr.e_n() == 1 { basis.diagonal_operator(|k| one::<R>() / basis.eta(pr.n - 1, k[pr.n - 1] as i64)) } else { eye(basis.dim()) };
        let eta_a = basis.eta_a_operator();
        let eta_a_inv = basis.diagonal_operator(|k| one::<R>() / basis.eta_a_value(k));
        let pref = pow(pr.k_const(), p - 1) * c::<R>(p as f64, 0.0);
        let ops = (0..nn)
            .map(|a| {
                let mut den = pref;
                for b in 0..nn {
                    if b != a {
                        den *= dd(basis.grid.z[a], basis.grid.z[b]);
                    }
                }
                (0..p)
                    .map(|k| {
                        let mut x = basis.mono.a.eval(basis.eta(a, k));
                        for j in (k + 1)..(k + p) {
                            x = basis.mono.b.eval(basis.eta(a, j)) * x;
                        }
                        if pr.e_n() == 1 {
                            x = matpow(&eta_n_inv, p - 1).expect("positive power") * x;
                        }
                        x / den
                    })
                    .collect()
            })
            .collect();
        Self { ops, eta_n, eta_n_inv, eta_a, eta_a_inv, theta: basis.theta.clone() }
    }

    pub fn op(&self, a: usize, k: i64) -> &Mat<R> {
        let p = self.ops[a].len() as i64;
        &self.ops[a][k.rem_euclid(p) as usize]
    }

    /// O^{(alpha)}_{a,k} = O_{a,k} O_{a,k-1} ... O_{a,k+1-alpha}.
    pub fn power(&self, a: usize, k: i64, alpha: usize) -> Mat<R> {
        let mut x = eye::<R>(self.eta_n.nrows());
        for j in 0..alpha as i64 {
            x *= self.op(a, k - j);
        }
        x
    }
}

/// Expected left action: <k| O_{a,h} = delta_{k_a,h} a(eta)/prod_{c != a}(eta/eta_c - eta_c/eta) <k - e_a|.
pub fn o_action_expected<R: Real>(basis: &SovBasis<R>, a: usize, h: usize) -> Mat<R> {
    let pr = &basis.params;
    let d = basis.dim();
    let mut g = DMatrix::zeros(d, d);
    for (i, lab) in basis.labels().enumerate() {
        if lab[a] != h {
            continue;
        }
        let e = basis.eta(a, h as i64);
        let mut w = pr.coeff_a(e);
        for cc in 0..pr.nn() {
            if cc != a {
                w /= dd(e, basis.eta(cc, lab[cc] as i64));
            }
        }
        let mut low = lab.clone();
        low[a] = (h + pr.p - 1) % pr.p;
        g[(i, index_of(&low, pr.p))] = w;
    }
    g
}

/// Scalar of the cycle O^{(p+1)}_{a,k} = c_a O_{a,k}: A(Z_a)/prod_{b != a}(Z_a/Z_b - Z_b/Z_a).
pub fn o_mean_value<R: Real>(basis: &SovBasis<R>, a: usize) -> Cx<R> {
    let pr = &basis.params;
    let z = &basis.grid.z;
    let mut v = pr.average_value(Entry::A, z[a]);
    for b in 0..pr.nn() {
        if b != a {
            v /= dd(z[a], z[b]);
        }
    }
    v
}

/// O_{a,k} O_{b,h} = r O_{b,h} O_{a,k} for a != b, with
/// r = (eta_a^{(k)}/eta_b^{(h-1)} - ...)/(eta_a^{(k-1)}/eta_b^{(h)} - ...).
pub fn com_o_ratio<R: Real>(basis: &SovBasis<R>, a: usize, k: i64, b: usize, h: i64) -> Cx<R> {
    dd(basis.eta(a, k), basis.eta(b, h - 1)) / dd(basis.eta(a, k - 1), basis.eta(b, h))
}

/// B^{-1}(lambda)A(lambda) = e_N eta_N^{-1}(lambda eta_A^{-1} Theta - eta_A Theta^{-1}/lambda)
///   + (1/K) eta_N^{-e_N} sum_{a,k} O_{a,k}/(lambda/eta_a^{(k)} - eta_a^{(k)}/lambda).
pub fn binv_a_interpolation<R: Real>(basis: &SovBasis<R>, ops: &ElementaryOps<R>, lambda: Cx<R>) -> Mat<R> {
    let pr = &basis.params;
    let d = basis.dim();
    let mut x = DMatrix::zeros(d, d);
    for a in 0..pr.nn() {
        for k in 0..pr.p as i64 {
            x += ops.op(a, k) / dd(lambda, basis.eta(a, k));
        }
    }
    x /= pr.k_const();
    if let Some(th) = &ops.theta {
        x = &ops.eta_n_inv * x;
        let thi = inverse(th).expect("Theta is unitary up to a central phase");
        x += &ops.eta_n_inv * ((&ops.eta_a_inv * th) * lambda - (&ops.eta_a * thi) / lambda);
    }
    x
}

/// Result of normal-ordering a monomial of elementary operators.
#[derive(Clone, Debug, PartialEq)]
pub enum Reduced<R: Real> {
    Zero,
    Term { scalar: Cx<R>, factors: Vec<(usize, i64)> },
}

/// Normal order: variables ascending, each variable's factors contiguous with k descending by one;
/// Com-O for swaps, Prod-O-zeros for vanishing, O-mean-value for runs longer than p.
pub fn reduce_o_monomial<R: Real>(basis: &SovBasis<R>, factors: &[(usize, i64)]) -> Reduced<R> {
    let p = basis.params.p as i64;
    let mut f: Vec<(usize, i64)> = factors.iter().map(|(a, k)| (*a, k.rem_euclid(p))).collect();
    let mut scalar = one::<R>();
    let n = f.len();
    for i in 0..n {
        for j in 0..n - 1 - i {
            if f[j].0 > f[j + 1].0 {
                let (a, k) = f[j];
                let (b, h) = f[j + 1];
                scalar *= com_o_ratio(basis, a, k, b, h);
                f.swap(j, j + 1);
            }
        }
    }
    for w in f.windows(2) {
        if w[0].0 == w[1].0 && w[1].1 != (w[0].1 - 1).rem_euclid(p) {
            return Reduced::Zero;
        }
    }
    let mut out: Vec<(usize, i64)> = vec![];
    let mut i = 0;
    while i < f.len() {
        let a = f[i].0;
        let mut run: Vec<(usize, i64)> = vec![];
        while i < f.len() && f[i].0 == a {
            run.push(f[i]);
            i += 1;
        }
        while run.len() > p as usize {
            scalar *= o_mean_value(basis, a);
            run.drain(1..=p as usize);
        }
        out.extend(run);
    }
    Reduced::Term { scalar, factors: out }
}

pub fn monomial_matrix<R: Real>(ops: &ElementaryOps<R>, factors: &[(usize, i64)]) -> Mat<R> {
    let mut x = eye::<R>(ops.eta_n.nrows());
    for (a, k) in factors {
        x *= ops.op(*a, *k);
    }
    x
}

/// One factor O^{(alpha)}_{a,k} of an elementary basis element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OFactor {
    pub a: usize,
    pub k: i64,
    pub alpha: usize,
}

/// eta_N^{-h} (Theta eta_A^{-1})^{h0} prod_i O^{(alpha_i)}_{a_i, k_i} (h, h0 zero for odd chains).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElementaryBasisElement {
    pub h: usize,
    pub h0: usize,
    pub factors: Vec<OFactor>,
}

impl std::fmt::Display for ElementaryBasisElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "h={},h0={}", self.h, self.h0)?;
        for o in &self.factors {
            write!(f, ",o={}/{}/{}", o.a, o.k, o.alpha)?;
        }
        Ok(())
    }
}

impl std::str::FromStr for ElementaryBasisElement {
    type Err = SgError;

    /// `h=1,h0=0,o=a/k/alpha,...`; h and h0 default to 0.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| SgError::InvalidParams(format!("elementary element '{s}': {why}"));
        let mut el = Self { h: 0, h0: 0, factors: vec![] };
        for part in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            let (key, val) = part.split_once('=').ok_or_else(|| bad("expected key=value"))?;
            match key {
                "h" => el.h = val.parse().map_err(|_| bad("h"))?,
                "h0" => el.h0 = val.parse().map_err(|_| bad("h0"))?,
                "o" => {
                    let v: Vec<&str> = val.split('/').collect();
                    if v.len() != 3 {
                        return Err(bad("o needs a/k/alpha"));
                    }
                    el.factors.push(OFactor {
                        a: v[0].parse().map_err(|_| bad("a"))?,
                        k: v[1].parse().map_err(|_| bad("k"))?,
                        alpha: v[2].parse().map_err(|_| bad("alpha"))?,
                    });
                }
                _ => return Err(bad("unknown key")),
            }
        }
        Ok(el)
    }
}

impl ElementaryBasisElement {
    pub fn validate(&self, nn: usize, p: usize) -> Result<()> {
        let mut last: Option<usize> = None;
        let mut total = 0;
        for f in &self.factors {
            if f.a >= nn || f.alpha == 0 || f.alpha > p {
                return Err(SgError::IndexOutOfRange(format!("factor {f:?}")));
            }
            if last.is_some_and(|l| l >= f.a) {
                return Err(SgError::InvalidParams("factor variables must be strictly increasing".into()));
            }
            last = Some(f.a);
            total += f.alpha;
        }
        if total > p {
            return Err(SgError::InvalidParams(format!("sum of alpha = {total} exceeds p = {p}")));
        }
        Ok(())
    }

    pub fn matrix<R: Real>(&self, ops: &ElementaryOps<R>) -> Mat<R> {
        let mut x = eye::<R>(ops.eta_n.nrows());
        if let Some(th) = &ops.theta {
            x = matpow(&ops.eta_n_inv, self.h as i64).expect("positive power") * matpow(&(th * &ops.eta_a_inv), self.h0 as i64).expect("positive power");
        }
        for f in &self.factors {
            x *= ops.power(f.a, f.k, f.alpha);
        }
        x
    }
}

/// Cyclic leg permutation W with W X_j W^{-1} = X_{j+n-1 mod N}; on a homogeneous
/// chain W M(lambda) W^{-1} = M^{(n)}(lambda).
pub fn leg_permutation<R: Real>(params: &ModelParams<R>, n: usize) -> Mat<R> {
    let (nsites, p) = (params.n, params.p);
    let d = params.dim();
    let mut w = DMatrix::zeros(d, d);
    for idx in 0..d {
        let k = crate::sov_basis::label_of(idx, nsites, p);
        let mut kp = vec![0; nsites];
        for j in 0..nsites {
            kp[(j + n - 1) % nsites] = k[j];
        }
        w[(index_of(&kp, p), idx)] = one();
    }
    w
}

/// Shift operator U_n (homogeneous chains only).
pub fn shift_operator<R: Real>(params: &ModelParams<R>, n: usize) -> Result<Mat<R>> {
    if n == 0 || n > params.n {
        return Err(SgError::IndexOutOfRange(format!("site {n} not in 1..={}", params.n)));
    }
    if n > 1 && !params.is_homogeneous() {
        return Err(SgError::ShiftUnavailable("U_n is only realized for homogeneous chains".into()));
    }
    Ok(leg_permutation(params, n))
}

/// Relative Frobenius residual ||x - y|| / max(||y||, floor).
pub fn rel_err<R: Real>(x: &Mat<R>, y: &Mat<R>) -> f64 {
    fro(&(x - y)) / fro(y).max(1e-300)
}
