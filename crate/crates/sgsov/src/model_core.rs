//! Cyclic Weyl representation, Lax and monodromy matrices, transfer matrix,
//! Theta-charge, quantum determinant and average values.

use crate::laurent::OperatorLaurent;
use crate::linalg::{eye, fro, kron};
use crate::scalar::{abs, cr, csqrt, floor_tol, imag_unit, one, phase, pow, principal_root, zero, Cx, Mat, Real};
use crate::{Result, SgError};
use nalgebra::DMatrix;

/// Largest state-space dimension accepted.
pub const MAX_DIM: usize = 20_000;

#[derive(Clone, Debug)]
pub struct ModelParams<R: Real> {
    pub n: usize,
    pub p: usize,
    pub p_prime: usize,
    pub kappa: Vec<Cx<R>>,
    pub xi: Vec<Cx<R>>,
    pub u: Vec<Cx<R>>,
    pub v: Vec<Cx<R>>,
}

impl<R: Real> ModelParams<R> {
    pub fn new(p: usize, p_prime: usize, kappa: Vec<Cx<R>>, xi: Vec<Cx<R>>, u: Option<Vec<Cx<R>>>, v: Option<Vec<Cx<R>>>) -> Result<Self> {
        let n = kappa.len();
        let bad = |m: String| Err(SgError::InvalidParams(m));
        if n == 0 {
            return bad("at least one site is required".into());
        }
        if xi.len() != n {
            return bad(format!("kappa has {} entries but xi has {}", n, xi.len()));
        }
        if p < 3 || p.is_multiple_of(2) {
            return bad(format!("p must be odd and >= 3, got {p}"));
        }
        if p_prime == 0 || p_prime % 2 == 1 {
            return bad(format!("p' must be even and positive, got {p_prime}"));
        }
        let u = u.unwrap_or_else(|| vec![one(); n]);
        let v = v.unwrap_or_else(|| vec![one(); n]);
        if u.len() != n || v.len() != n {
            return bad("u and v must have one entry per site".into());
        }
        for z in u.iter().chain(v.iter()) {
            if (abs(*z) - 1.0).abs() > floor_tol::<R>(1e-12) {
                return bad(format!("central parameters must have unit modulus, got |z| = {}", abs(*z)));
            }
        }
        for z in kappa.iter().chain(xi.iter()) {
            if abs(*z) < floor_tol::<R>(1e-12) {
                return bad("kappa and xi must be nonzero".into());
            }
        }
        let dim = p.checked_pow(n as u32).unwrap_or(usize::MAX);
        if dim > MAX_DIM {
            return bad(format!("state space p^N = {dim} exceeds {MAX_DIM}"));
        }
        let m = Self { n, p, p_prime, kappa, xi, u, v };
        let q = m.q();
        if abs(pow(q, p as i64) - one()) > floor_tol::<R>(1e-12) {
            return bad("q^p != 1".into());
        }
        for k in 1..p {
            if abs(pow(q, k as i64) - one()) < floor_tol::<R>(1e-12) {
                return bad(format!("q is not a primitive p-th root of unity (q^{k} = 1); gcd(p', p) must be 1"));
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.p.pow(self.n as u32)
    }

    /// q = exp(-i pi p'/p).
    pub fn q(&self) -> Cx<R> {
        phase(-(self.p_prime as f64) / self.p as f64)
    }

    /// q^{1/2} = exp(-i pi p'/(2p)).
    pub fn q_half(&self) -> Cx<R> {
        phase(-(self.p_prime as f64) / (2.0 * self.p as f64))
    }

    /// q^k evaluated from the exact phase, k any integer.
    pub fn qp(&self, k: i64) -> Cx<R> {
        let r = (k * self.p_prime as i64).rem_euclid(2 * self.p as i64);
        phase(-(r as f64) / self.p as f64)
    }

    /// 1 for even chains, 0 for odd.
    pub fn e_n(&self) -> usize {
        usize::from(self.n.is_multiple_of(2))
    }

    /// [N] = N - e_N, the number of separate variables with dynamics.
    pub fn nn(&self) -> usize {
        self.n - self.e_n()
    }

    /// N-bar = N + e_N - 1, the degree of the transfer matrix.
    pub fn nbar(&self) -> usize {
        self.n + self.e_n() - 1
    }

    /// K = prod kappa_n / i.
    pub fn k_const(&self) -> Cx<R> {
        self.kappa.iter().fold(one(), |acc, k| acc * *k / imag_unit::<R>())
    }

    pub fn mu_plus(&self, n: usize) -> Cx<R> {
        imag_unit::<R>() * self.kappa[n - 1] * self.q_half() * self.xi[n - 1]
    }

    pub fn mu_minus(&self, n: usize) -> Cx<R> {
        imag_unit::<R>() / self.kappa[n - 1] * self.q_half() * self.xi[n - 1]
    }

    pub fn xi_product(&self) -> Cx<R> {
        self.xi.iter().fold(one(), |acc, x| acc * *x)
    }

    /// u = v = 1 on every site, the representations the SOV construction assumes.
    pub fn is_special_rep(&self) -> bool {
        self.u.iter().chain(self.v.iter()).all(|z| abs(*z - one()) < floor_tol::<R>(1e-12))
    }

    pub fn is_homogeneous(&self) -> bool {
        self.kappa.iter().all(|k| abs(*k - self.kappa[0]) < floor_tol::<R>(1e-12)) && self.xi.iter().all(|x| abs(*x - self.xi[0]) < floor_tol::<R>(1e-12))
    }

    /// The uniform epsilon of the hermiticity condition, if the parameters are self-adjoint.
    pub fn self_adjoint_epsilon(&self) -> Option<Cx<R>> {
        let tol = floor_tol::<R>(1e-12);
        let mut eps: Option<Cx<R>> = None;
        for (k, x) in self.kappa.iter().zip(self.xi.iter()) {
            if (k * k).im.to_f64().abs() > tol * abs(k * k) || (x * x).im.to_f64().abs() > tol * abs(x * x) {
                return None;
            }
            let e = -(k * x) / (k.conj() * x.conj());
            match eps {
                None => eps = Some(e),
                Some(e0) if abs(e - e0) > tol => return None,
                _ => {}
            }
        }
        eps
    }

    pub fn site_embed(&self, n: usize, x: &Mat<R>) -> Result<Mat<R>> {
        if n == 0 || n > self.n {
            return Err(SgError::IndexOutOfRange(format!("site {n} not in 1..={}", self.n)));
        }
        Ok(site_embed_raw(self.n, self.p, n, x))
    }

    /// Weyl pair (U, V) of site n.
    pub fn weyl(&self, n: usize) -> (Mat<R>, Mat<R>) {
        weyl_generators(self.p, self.u[n - 1], self.v[n - 1], self.q())
    }

    /// Embedded u_n and v_n.
    pub fn local_uv(&self, n: usize) -> (Mat<R>, Mat<R>) {
        let (u, v) = self.weyl(n);
        (site_embed_raw(self.n, self.p, n, &u), site_embed_raw(self.n, self.p, n, &v))
    }

    /// Entries of the Lax matrix of site n as degree-one Laurent operators.
    pub fn lax_matrix(&self, n: usize) -> Result<[[OperatorLaurent<R>; 2]; 2]> {
        if n == 0 || n > self.n {
            return Err(SgError::IndexOutOfRange(format!("site {n} not in 1..={}", self.n)));
        }
        let (u, v) = self.local_uv(n);
        let ui = site_embed_raw(self.n, self.p, n, &inverse_unitary(&self.weyl(n).0));
        let vi = site_embed_raw(self.n, self.p, n, &inverse_unitary(&self.weyl(n).1));
        let k = self.kappa[n - 1];
        let x = self.xi[n - 1];
        let qh = self.q_half();
        let i = imag_unit::<R>();
        let a = (&u * (&v * (k / qh) + &vi * (qh / k))) * k;
        let d = (&ui * (&v * (qh / k) + &vi * (k / qh))) * k;
        let b = OperatorLaurent { min_deg: -1, coeffs: vec![&vi * (-k * x / i), &v * (k / (x * i))] };
        let cc = OperatorLaurent { min_deg: -1, coeffs: vec![&v * (-k * x / i), &vi * (k / (x * i))] };
        Ok([[OperatorLaurent::constant(a), b], [cc, OperatorLaurent::constant(d)]])
    }

    /// Monodromy L_N ... L_1.
    pub fn monodromy(&self) -> Monodromy<R> {
        let order: Vec<usize> = (1..=self.n).collect();
        self.ordered_monodromy(&order)
    }

    /// Product of Lax factors; `order[0]` is the rightmost factor.
    pub fn ordered_monodromy(&self, order: &[usize]) -> Monodromy<R> {
        let dim = self.dim();
        let mut m = [[OperatorLaurent::constant(eye(dim)), OperatorLaurent::zero(dim)], [OperatorLaurent::zero(dim), OperatorLaurent::constant(eye(dim))]];
        let mut first = true;
        for &n in order {
            let l = self.lax_matrix(n).expect("valid site");
            if first {
                m = l;
                first = false;
                continue;
            }
            let prod = |i: usize, j: usize| l[i][0].mul(&m[0][j]).add(&l[i][1].mul(&m[1][j]));
            m = [[prod(0, 0), prod(0, 1)], [prod(1, 0), prod(1, 1)]];
        }
        let [[a, b], [cc, d]] = m;
        Monodromy { a, b, c: cc, d }
    }

    /// Theta = prod_n v_n^{(-1)^n}; defined for even chains.
    pub fn theta_charge(&self) -> Result<Mat<R>> {
        if self.n % 2 == 1 {
            return Err(SgError::OddChain);
        }
        Ok(self.theta_unchecked())
    }

    pub(crate) fn theta_unchecked(&self) -> Mat<R> {
        let mut t = eye::<R>(self.dim());
        for n in 1..=self.n {
            let (_, v) = self.weyl(n);
            let f = if n % 2 == 0 { v } else { inverse_unitary(&v) };
            t *= site_embed_raw(self.n, self.p, n, &f);
        }
        t
    }

    /// det_q(lambda) = A(l) D(l/q) - B(l) C(l/q), as a closed product.
    pub fn quantum_determinant(&self, lambda: Cx<R>) -> Cx<R> {
        let sign = if self.n.is_multiple_of(2) { one::<R>() } else { -one::<R>() };
        sign * self.quantum_determinant_printed(lambda)
    }

    /// prod kappa^2 (l/mu+ - mu+/l)(l/mu- - mu-/l) exactly as printed; differs by (-1)^N.
    pub fn quantum_determinant_printed(&self, lambda: Cx<R>) -> Cx<R> {
        (1..=self.n).fold(one(), |acc, n| {
            let (mp, mm) = (self.mu_plus(n), self.mu_minus(n));
            let k = self.kappa[n - 1];
            acc * k * k * (lambda / mp - mp / lambda) * (lambda / mm - mm / lambda)
        })
    }

    /// a(lambda) of the left SOV representation.
    pub fn coeff_a(&self, lambda: Cx<R>) -> Cx<R> {
        let i = imag_unit::<R>();
        let qh = self.q_half();
        let mut acc = pow(-i, self.n as i64);
        for (k, x) in self.kappa.iter().zip(self.xi.iter()) {
            let l = lambda / x;
            acc *= (*k / l) * (one::<R>() + i / qh * l * *k) * (one::<R>() + i / qh * l / *k);
        }
        acc
    }

    /// d(lambda) = q^N a(-lambda q).
    pub fn coeff_d(&self, lambda: Cx<R>) -> Cx<R> {
        self.qp(self.n as i64) * self.coeff_a(-lambda * self.q())
    }

    /// Right-gauge coefficients a-bar(l) = a(q l), d-bar(l) = d(l/q).
    pub fn coeff_a_bar(&self, lambda: Cx<R>) -> Cx<R> {
        self.coeff_a(lambda * self.q())
    }

    pub fn coeff_d_bar(&self, lambda: Cx<R>) -> Cx<R> {
        self.coeff_d(lambda / self.q())
    }

    /// Single-site average matrix at Lambda = lambda^p.
    pub fn average_site(&self, n: usize, big_lambda: Cx<R>) -> [[Cx<R>; 2]; 2] {
        let p = self.p as i64;
        let k = self.kappa[n - 1];
        let x = self.xi[n - 1];
        let (u, v) = (self.u[n - 1], self.v[n - 1]);
        let qhp = pow(self.q_half(), p);
        let i = imag_unit::<R>();
        let (kp, k2p, vp, up, xp) = (pow(k, p), pow(k, 2 * p), pow(v, p), pow(u, p), pow(x, p));
        let ip = pow(i, p);
        let a = qhp * up * (k2p * vp + one::<R>() / vp);
        let d = qhp / up * (k2p / vp + vp);
        let b = kp * (big_lambda * vp / xp - xp / (big_lambda * vp)) / ip;
        let cc = kp * (big_lambda / (vp * xp) - xp * vp / big_lambda) / ip;
        [[a, b], [cc, d]]
    }

    /// Average monodromy as the ordered 2x2 product of site averages.
    pub fn average_lax(&self, big_lambda: Cx<R>) -> [[Cx<R>; 2]; 2] {
        let mut m = [[one::<R>(), zero()], [zero(), one()]];
        for n in 1..=self.n {
            let l = self.average_site(n, big_lambda);
            m = mul2(&l, &m);
        }
        m
    }

    pub fn average_value(&self, entry: Entry, big_lambda: Cx<R>) -> Cx<R> {
        let m = self.average_lax(big_lambda);
        let (i, j) = entry.index();
        m[i][j]
    }

    /// The 4x4 six-vertex R-matrix.
    pub fn r_matrix(&self, lambda: Cx<R>) -> DMatrix<Cx<R>> {
        let q = self.q();
        let a = q * lambda - one::<R>() / (q * lambda);
        let b = lambda - one::<R>() / lambda;
        let cc = q - one::<R>() / q;
        let mut r = DMatrix::zeros(4, 4);
        r[(0, 0)] = a;
        r[(3, 3)] = a;
        r[(1, 1)] = b;
        r[(2, 2)] = b;
        r[(1, 2)] = cc;
        r[(2, 1)] = cc;
        r
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Entry {
    A,
    B,
    C,
    D,
}

impl Entry {
    pub fn index(self) -> (usize, usize) {
        match self {
            Entry::A => (0, 0),
            Entry::B => (0, 1),
            Entry::C => (1, 0),
            Entry::D => (1, 1),
        }
    }

    pub fn all() -> [Entry; 4] {
        [Entry::A, Entry::B, Entry::C, Entry::D]
    }
}

#[derive(Clone, Debug)]
pub struct Monodromy<R: Real> {
    pub a: OperatorLaurent<R>,
    pub b: OperatorLaurent<R>,
    pub c: OperatorLaurent<R>,
    pub d: OperatorLaurent<R>,
}

impl<R: Real> Monodromy<R> {
    pub fn entry(&self, e: Entry) -> &OperatorLaurent<R> {
        match e {
            Entry::A => &self.a,
            Entry::B => &self.b,
            Entry::C => &self.c,
            Entry::D => &self.d,
        }
    }

    pub fn eval(&self, lambda: Cx<R>) -> [[Mat<R>; 2]; 2] {
        [[self.a.eval(lambda), self.b.eval(lambda)], [self.c.eval(lambda), self.d.eval(lambda)]]
    }

    pub fn transfer_poly(&self) -> OperatorLaurent<R> {
        self.a.add(&self.d)
    }

    pub fn transfer(&self, lambda: Cx<R>) -> Mat<R> {
        self.a.eval(lambda) + self.d.eval(lambda)
    }

    /// The p^N x p^N block operator M(lambda) on C^2 (x) H, row-major in the auxiliary index.
    pub fn block(&self, lambda: Cx<R>) -> Mat<R> {
        let m = self.eval(lambda);
        let dim = m[0][0].nrows();
        let mut out = DMatrix::zeros(2 * dim, 2 * dim);
        for i in 0..2 {
            for j in 0..2 {
                out.view_mut((i * dim, j * dim), (dim, dim)).copy_from(&m[i][j]);
            }
        }
        out
    }
}

/// U maps basis vector k to k - 1 (mod p) scaled by u; V = diag(v q^k).
pub fn weyl_generators<R: Real>(p: usize, u: Cx<R>, v: Cx<R>, q: Cx<R>) -> (Mat<R>, Mat<R>) {
    let mut um = DMatrix::zeros(p, p);
    let mut vm = DMatrix::zeros(p, p);
    let mut qk = one::<R>();
    for k in 0..p {
        um[((k + p - 1) % p, k)] = u;
        vm[(k, k)] = v * qk;
        qk *= q;
    }
    (um, vm)
}

/// Id (x) ... (x) X (x) ... (x) Id with site 1 least significant (rightmost).
pub fn site_embed_raw<R: Real>(n_sites: usize, p: usize, n: usize, x: &Mat<R>) -> Mat<R> {
    let mut out = eye::<R>(1);
    for m in (1..=n_sites).rev() {
        out = if m == n { kron(&out, x) } else { kron(&out, &eye(p)) };
    }
    out
}

pub fn inverse_unitary<R: Real>(m: &Mat<R>) -> Mat<R> {
    m.adjoint()
}

pub fn mul2<R: Real>(a: &[[Cx<R>; 2]; 2], b: &[[Cx<R>; 2]; 2]) -> [[Cx<R>; 2]; 2] {
    let mut o = [[zero(), zero()], [zero(), zero()]];
    for i in 0..2 {
        for j in 0..2 {
            o[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    o
}

/// Product of Frobenius norms, the scale of residual bounds.
pub fn scale<R: Real>(ms: &[&Mat<R>]) -> f64 {
    ms.iter().map(|m| fro(m)).product::<f64>().max(1e-300)
}

/// Dense average: prod_{k=1}^p O(q^k lambda), reduced to a scalar.
pub fn average_dense<R: Real>(params: &ModelParams<R>, mono: &Monodromy<R>, entry: Entry, lambda: Cx<R>, tol: f64) -> Result<Cx<R>> {
    let op = mono.entry(entry);
    let mut prod = eye::<R>(params.dim());
    for k in 1..=params.p as i64 {
        prod *= op.eval(params.qp(k) * lambda);
    }
    let dim = params.dim();
    let s = prod.trace() / cr(R::lit(dim as f64));
    let dev = fro(&(&prod - eye::<R>(dim) * s));
    let mut sc = 1.0;
    for k in 1..=params.p as i64 {
        sc *= fro(&op.eval(params.qp(k) * lambda));
    }
    if dev > tol * sc.max(1e-300) {
        return Err(SgError::NotCentral(dev / sc));
    }
    Ok(s)
}

/// A p-th root of Lambda used to evaluate averages densely.
pub fn lambda_from_big<R: Real>(params: &ModelParams<R>, big_lambda: Cx<R>) -> Cx<R> {
    principal_root(big_lambda, params.p)
}

/// Quantum-projector factors of L_n at mu_{n,+} or mu_{n,-}, with u^{1/2} = U^{(p+1)/2} / u^{p/2}.
/// Returns (P, Q) as 2x1 and 1x2 operator blocks packed into dense block matrices.
pub fn lax_projectors<R: Real>(params: &ModelParams<R>, n: usize, plus: bool) -> (Mat<R>, Mat<R>) {
    let (um, vm) = params.weyl(n);
    let p = params.p;
    let k = params.kappa[n - 1];
    let mut s = eye::<R>(p);
    for _ in 0..p.div_ceil(2) {
        s *= &um;
    }
    let up = pow(params.u[n - 1], p as i64);
    s /= csqrt(up);
    let si = inverse_unitary(&s);
    let vi = inverse_unitary(&vm);
    let x1 = &vm * k + &vi / k;
    let x2 = &vm / k + &vi * k;
    let emb = |x: &Mat<R>| site_embed_raw(params.n, p, n, x);
    let d = params.dim();
    let mut pm = DMatrix::zeros(2 * d, d);
    let mut qm = DMatrix::zeros(d, 2 * d);
    if plus {
        pm.view_mut((0, 0), (d, d)).copy_from(&(emb(&(&s * &x1)) * k));
        pm.view_mut((d, 0), (d, d)).copy_from(&(emb(&(&si * &x2)) * k));
        qm.view_mut((0, 0), (d, d)).copy_from(&emb(&s));
        qm.view_mut((0, d), (d, d)).copy_from(&emb(&si));
    } else {
        pm.view_mut((0, 0), (d, d)).copy_from(&(emb(&s) * k));
        pm.view_mut((d, 0), (d, d)).copy_from(&(emb(&si) * k));
        qm.view_mut((0, 0), (d, d)).copy_from(&emb(&(&x1 * &s)));
        qm.view_mut((0, d), (d, d)).copy_from(&emb(&(&x2 * &si)));
    }
    (pm, qm)
}

/// ||R(l/m)(M(l) (x) 1)(1 (x) M(m)) - (1 (x) M(m))(M(l) (x) 1)R(l/m)|| / scale, evaluated
/// blockwise on the aux index 2 i1 + i2 instead of forming the 4 p^N embedding.
pub fn yang_baxter_residual<R: Real>(params: &ModelParams<R>, mono: &Monodromy<R>, lambda: Cx<R>, mu: Cx<R>) -> f64 {
    let d = params.dim();
    let (l, m) = (mono.eval(lambda), mono.eval(mu));
    let r = params.r_matrix(lambda / mu);
    let split = |a: usize| (a / 2, a % 2);
    let (mut p12, mut p21) = (Vec::with_capacity(16), Vec::with_capacity(16));
    for a in 0..4 {
        let (i1, i2) = split(a);
        for b in 0..4 {
            let (j1, j2) = split(b);
            p12.push(&l[i1][j1] * &m[i2][j2]);
            p21.push(&m[i2][j2] * &l[i1][j1]);
        }
    }
    let mut res = R::zero();
    for a in 0..4 {
        for b in 0..4 {
            let mut x = Mat::<R>::zeros(d, d);
            for k in 0..4 {
                x += &p12[4 * k + b] * r[(a, k)] - &p21[4 * a + k] * r[(k, b)];
            }
            res += x.norm_squared();
        }
    }
    let blocks = |x: &[[Mat<R>; 2]; 2]| x.iter().flatten().map(|y| fro(y).powi(2)).sum::<f64>();
    let sc = fro(&r) * (d as f64).sqrt() * (2.0 * blocks(&l)).sqrt() * (2.0 * blocks(&m)).sqrt();
    res.to_f64().sqrt() / sc
}

/// ||A(l)D(l/q) - B(l)C(l/q) - det_q(l) Id|| / scale.
pub fn qdet_residual<R: Real>(params: &ModelParams<R>, mono: &Monodromy<R>, lambda: Cx<R>) -> f64 {
    let lq = lambda / params.q();
    let (a, b, cc, d) = (mono.a.eval(lambda), mono.b.eval(lambda), mono.c.eval(lq), mono.d.eval(lq));
    let x = &a * &d - &b * &cc - eye::<R>(params.dim()) * params.quantum_determinant(lambda);
    fro(&x) / (scale(&[&a, &d]) + scale(&[&b, &cc]))
}

/// |a(l) d(l/q) - det_q(l)| / |det_q(l)|.
pub fn qdet_ad_residual<R: Real>(params: &ModelParams<R>, lambda: Cx<R>) -> f64 {
    let dq = params.quantum_determinant(lambda);
    abs(params.coeff_a(lambda) * params.coeff_d(lambda / params.q()) - dq) / abs(dq).max(1e-300)
}

/// Worst of Theta C = q C Theta, B Theta = q Theta B, [A, Theta] = [D, Theta] = 0.
pub fn theta_residual<R: Real>(params: &ModelParams<R>, mono: &Monodromy<R>, lambda: Cx<R>) -> Result<f64> {
    let th = params.theta_charge()?;
    let q = params.q();
    let [[a, b], [cc, d]] = mono.eval(lambda);
    let r = |x: Mat<R>, m: &Mat<R>| fro(&x) / scale(&[&th, m]);
    Ok([r(&th * &cc - &cc * &th * q, &cc), r(&b * &th - &th * &b * q, &b), r(&a * &th - &th * &a, &a), r(&d * &th - &th * &d, &d)]
        .into_iter()
        .fold(0.0, f64::max))
}

/// Worst residual of A^dag(l) = D(l*), B^dag(l) = C(eps l*), C^dag(l) = B(eps l*), D^dag(l) = A(l*);
/// None when the parameters are not self-adjoint.
pub fn hermiticity_residual<R: Real>(params: &ModelParams<R>, mono: &Monodromy<R>, lambda: Cx<R>) -> Option<f64> {
    let eps = params.self_adjoint_epsilon()?;
    let lc = lambda.conj();
    let [[a, b], [cc, d]] = mono.eval(lambda);
    let r = |x: &Mat<R>, y: Mat<R>| fro(&(x.adjoint() - &y)) / fro(x).max(1e-300);
    Some([r(&a, mono.d.eval(lc)), r(&b, mono.c.eval(eps * lc)), r(&cc, mono.b.eval(eps * lc)), r(&d, mono.a.eval(lc))].into_iter().fold(0.0, f64::max))
}

/// ||T(l) - T(l)^dag|| / ||T|| for self-adjoint parameters and real l.
pub fn transfer_hermiticity_residual<R: Real>(mono: &Monodromy<R>, lambda: R) -> f64 {
    let t = mono.transfer(cr(lambda));
    fro(&(&t - t.adjoint())) / fro(&t).max(1e-300)
}

/// ||[T(l), T(m)]|| / ||T(l)|| ||T(m)||.
pub fn transfer_commutator_residual<R: Real>(mono: &Monodromy<R>, lambda: Cx<R>, mu: Cx<R>) -> f64 {
    let (a, b) = (mono.transfer(lambda), mono.transfer(mu));
    fro(&(&a * &b - &b * &a)) / scale(&[&a, &b])
}

/// Relative mismatch between the dense average prod_k O(q^k l) and the 2x2 product formula at l^p.
pub fn average_residual<R: Real>(params: &ModelParams<R>, mono: &Monodromy<R>, entry: Entry, lambda: Cx<R>, tol: f64) -> Result<f64> {
    let dense = average_dense(params, mono, entry, lambda, tol)?;
    let formula = params.average_value(entry, pow(lambda, params.p as i64));
    Ok(abs(dense - formula) / abs(formula).max(abs(dense)).max(1e-300))
}

/// Worst ||[prod_k O(q^k l), X(m)]|| / scale over X in {A, B, C, D}.
pub fn centrality_residual<R: Real>(params: &ModelParams<R>, mono: &Monodromy<R>, entry: Entry, lambda: Cx<R>, mu: Cx<R>) -> f64 {
    let op = mono.entry(entry);
    let mut prod = eye::<R>(params.dim());
    for k in 1..=params.p as i64 {
        prod *= op.eval(params.qp(k) * lambda);
    }
    Entry::all()
        .iter()
        .map(|e| {
            let x = mono.entry(*e).eval(mu);
            fro(&(&prod * &x - &x * &prod)) / scale(&[&prod, &x])
        })
        .fold(0.0, f64::max)
}

/// ||L_n(mu_{n,+-}) - (q^{1/2})^p P Q|| / ||L_n||, the quantum-projector factorization.
pub fn lax_factorization_residual<R: Real>(params: &ModelParams<R>, n: usize, plus: bool) -> Result<f64> {
    let l = params.lax_matrix(n)?;
    let mu = if plus { params.mu_plus(n) } else { params.mu_minus(n) };
    let d = params.dim();
    let mut big = DMatrix::zeros(2 * d, 2 * d);
    for i in 0..2 {
        for j in 0..2 {
            big.view_mut((i * d, j * d), (d, d)).copy_from(&l[i][j].eval(mu));
        }
    }
    let (pm, qm) = lax_projectors(params, n, plus);
    Ok(fro(&(&big - pm * qm * pow(params.q_half(), params.p as i64))) / fro(&big).max(1e-300))
}
