//! Exact-diagonalization reference on small rings.
//!
//! Basis states are bit masks over ring positions, bit set = spin up. Chain site `s`
//! sits at ring position `s mod N`. Everything here is `f64`.

use crate::error::{Error, Result};
use crate::linalg::hermitian_eigen;
use crate::measures::{Spectrum, TwoSiteDensity};
use crate::model::{ChainSize, ModelParams};
use crate::vacuum::{Majorana, MajoranaKind};
use faer::{Mat, Side};
use num_complex::Complex;
use std::collections::HashMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::Arc;

type C64 = Complex<f64>;

/// Largest ring handled by the full-Hilbert-space oracle.
pub const MAX_SITES: usize = 12;
/// Largest ring handled by the isotropic few-flip oracle.
pub const MAX_SECTOR_SITES: usize = 64;

#[derive(Debug)]
pub struct Basis {
    n_sites: usize,
    configs: Vec<u64>,
    index: HashMap<u64, usize>,
}

impl Basis {
    fn from_configs(n_sites: usize, configs: Vec<u64>) -> Self {
        let index = configs.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        Self { n_sites, configs, index }
    }

    fn full(n: usize) -> Self {
        Self::from_configs(n, (0..1u64 << n).collect())
    }

    fn few_flips(n: usize, max_up: u32) -> Self {
        let mut configs = vec![0u64];
        for a in 0..n {
            if max_up >= 1 {
                configs.push(1 << a);
            }
            for b in a + 1..n {
                if max_up >= 2 {
                    configs.push((1 << a) | (1 << b));
                }
            }
        }
        configs.sort_unstable();
        Self::from_configs(n, configs)
    }

    pub fn dim(&self) -> usize {
        self.configs.len()
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn config(&self, i: usize) -> u64 {
        self.configs[i]
    }

    pub fn find(&self, c: u64) -> Option<usize> {
        self.index.get(&c).copied()
    }

    /// Ring position of chain site `s`.
    pub fn position(&self, s: i64) -> u32 {
        s.rem_euclid(self.n_sites as i64) as u32
    }

    fn bit(&self, s: i64) -> u64 {
        1u64 << self.position(s)
    }

    fn distinct(&self, sites: &[i64]) -> Result<u64> {
        let mut mask = 0u64;
        for &s in sites {
            let b = self.bit(s);
            if mask & b != 0 {
                return Err(Error::Precondition(format!("site {s} coincides with another site on a ring of {}", self.n_sites)));
            }
            mask |= b;
        }
        Ok(mask)
    }
}

/// Matrix elements `<c'|H|c>` of the ring Hamiltonian.
fn hamiltonian_column(n: usize, lambda: f64, gamma: f64, field: bool, c: u64) -> (f64, Vec<(u64, f64)>) {
    let up = c.count_ones() as f64;
    let diag = if field { -0.5 * (2.0 * up - n as f64) } else { 0.0 };
    let mut off = Vec::new();
    for s in 0..n {
        let b = (1u64 << s) | (1u64 << ((s + 1) % n));
        let parallel = (c & b).count_ones() != 1;
        let amp = if parallel { -0.5 * lambda * gamma } else { -0.5 * lambda };
        if amp != 0.0 {
            off.push((c ^ b, amp));
        }
    }
    (diag, off)
}

#[derive(Debug)]
struct Block {
    members: Vec<usize>,
    energies: Vec<f64>,
    vectors: Mat<f64>,
}

/// Spectral decomposition of a real symmetric Hamiltonian split into conserved blocks.
#[derive(Debug)]
struct Spectral {
    basis: Arc<Basis>,
    blocks: Vec<Block>,
}

impl Spectral {
    fn build(basis: Arc<Basis>, lambda: f64, gamma: f64, field: bool, label: impl Fn(u64) -> usize) -> Result<Self> {
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for (i, &c) in basis.configs.iter().enumerate() {
            let l = label(c);
            if groups.len() <= l {
                groups.resize(l + 1, Vec::new());
            }
            groups[l].push(i);
        }
        let n = basis.n_sites;
        let mut blocks = Vec::new();
        for members in groups.into_iter().filter(|g| !g.is_empty()) {
            let local: HashMap<usize, usize> = members.iter().enumerate().map(|(a, &i)| (i, a)).collect();
            let m = members.len();
            let mut h = Mat::<f64>::zeros(m, m);
            for (a, &i) in members.iter().enumerate() {
                let (d, off) = hamiltonian_column(n, lambda, gamma, field, basis.configs[i]);
                h[(a, a)] += d;
                for (c2, amp) in off {
                    let j = basis.find(c2).and_then(|j| local.get(&j).copied());
                    match j {
                        Some(b) => h[(b, a)] += amp,
                        None => return Err(Error::Precondition("Hamiltonian leaves the truncated basis".into())),
                    }
                }
            }
            let eig = h
                .self_adjoint_eigen(Side::Lower)
                .map_err(|e| Error::Precondition(format!("eigensolver failed: {e:?}")))?;
            let s = eig.S().column_vector();
            let energies = (0..m).map(|k| s[k]).collect();
            blocks.push(Block { members, energies, vectors: eig.U().to_owned() });
        }
        Ok(Self { basis, blocks })
    }

    fn evolve_vec(&self, psi: &[C64], t: f64) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); psi.len()];
        for b in &self.blocks {
            let v = &b.vectors;
            for k in 0..b.members.len() {
                let col = v.col(k);
                let mut c = C64::new(0.0, 0.0);
                for (a, &i) in b.members.iter().enumerate() {
                    c += psi[i] * col[a];
                }
                if c == C64::new(0.0, 0.0) {
                    continue;
                }
                c *= C64::from_polar(1.0, -b.energies[k] * t);
                for (a, &i) in b.members.iter().enumerate() {
                    out[i] += c * col[a];
                }
            }
        }
        out
    }

    fn ground(&self) -> (f64, Vec<C64>) {
        let (bi, _) = self
            .blocks
            .iter()
            .enumerate()
            .min_by(|x, y| x.1.energies[0].total_cmp(&y.1.energies[0]))
            .unwrap();
        let b = &self.blocks[bi];
        let mut psi = vec![C64::new(0.0, 0.0); self.basis.dim()];
        for (a, &i) in b.members.iter().enumerate() {
            psi[i] = C64::new(b.vectors[(a, 0)], 0.0);
        }
        (b.energies[0], psi)
    }

    fn energies(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self.blocks.iter().flat_map(|b| b.energies.iter().copied()).collect();
        e.sort_by(f64::total_cmp);
        e
    }
}

/// Initial states understood by the oracles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preparation {
    Vacuum,
    /// `(|up_i down_j> + e^{i phi} |down_i up_j>)/sqrt 2` on the vacuum.
    PsiBell { i: i64, j: i64, phi: f64 },
    /// `(|down_i down_j> + e^{i phi} |up_i up_j>)/sqrt 2` on the vacuum.
    PhiBell { i: i64, j: i64, phi: f64 },
    GroundState,
    /// Mixture carrying an exact singlet on `(i, j)` and the ground state's reduced
    /// state everywhere else.
    SingletKnittedGs { i: i64, j: i64 },
}

/// Pure state or finite mixture over an oracle basis.
#[derive(Debug, Clone)]
pub struct Register {
    basis: Arc<Basis>,
    components: Vec<(f64, Vec<C64>)>,
}

/// Reduced density matrix of `k` sites; local index bit `k - 1 - q` is set when site `q` is down.
#[derive(Debug, Clone)]
pub struct ReducedDensity {
    pub sites: usize,
    pub m: Vec<C64>,
}

impl Spectrum<f64> for ReducedDensity {
    fn spectrum(&self) -> Vec<f64> {
        hermitian_eigen(&self.m, 1 << self.sites).0
    }
}

impl Register {
    pub fn pure(basis: Arc<Basis>, psi: Vec<C64>) -> Result<Self> {
        Self::mixture(basis, vec![(1.0, psi)])
    }

    /// Weights must sum to one and every vector must be normalized, both within `1e-12`.
    pub fn mixture(basis: Arc<Basis>, components: Vec<(f64, Vec<C64>)>) -> Result<Self> {
        let total: f64 = components.iter().map(|c| c.0).sum();
        if (total - 1.0).abs() > 1e-12 || components.iter().any(|c| c.0 < 0.0) {
            return Err(Error::Precondition(format!("mixture weights sum to {total}")));
        }
        for (_, v) in &components {
            if v.len() != basis.dim() {
                return Err(Error::Precondition("state vector does not match the basis".into()));
            }
            let n: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            if (n - 1.0).abs() > 1e-12 {
                return Err(Error::Precondition(format!("state norm {n}")));
            }
        }
        Ok(Self { basis, components })
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn components(&self) -> &[(f64, Vec<C64>)] {
        &self.components
    }

    pub fn is_pure(&self) -> bool {
        self.components.len() == 1
    }

    /// Largest deviation of a component norm from one.
    pub fn norm_defect(&self) -> f64 {
        self.components
            .iter()
            .map(|(_, v)| (v.iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Amplitude of a basis configuration in a pure register.
    pub fn amplitude(&self, config: u64) -> Result<C64> {
        if !self.is_pure() {
            return Err(Error::Precondition("amplitudes need a pure state".into()));
        }
        Ok(self.basis.find(config).map_or(C64::new(0.0, 0.0), |i| self.components[0].1[i]))
    }

    /// Partial trace onto `sites`.
    pub fn reduced(&self, sites: &[i64]) -> Result<ReducedDensity> {
        let mask = self.basis.distinct(sites)?;
        let k = sites.len();
        let dim = 1usize << k;
        let bits: Vec<u64> = sites.iter().map(|&s| self.basis.bit(s)).collect();
        let mut m = vec![C64::new(0.0, 0.0); dim * dim];
        for (w, psi) in &self.components {
            let mut groups: HashMap<u64, Vec<(usize, C64)>> = HashMap::new();
            for (i, &c) in self.basis.configs.iter().enumerate() {
                if psi[i] == C64::new(0.0, 0.0) {
                    continue;
                }
                let local = bits
                    .iter()
                    .enumerate()
                    .fold(0usize, |acc, (q, &b)| acc | (usize::from(c & b == 0) << (k - 1 - q)));
                groups.entry(c & !mask).or_default().push((local, psi[i]));
            }
            for g in groups.values() {
                for &(a, za) in g {
                    for &(b, zb) in g {
                        m[a * dim + b] += za * zb.conj() * *w;
                    }
                }
            }
        }
        Ok(ReducedDensity { sites: k, m })
    }

    pub fn rho2(&self, n: i64, m: i64) -> Result<TwoSiteDensity<f64>> {
        let r = self.reduced(&[n, m])?;
        let mut a = [C64::new(0.0, 0.0); 16];
        a.copy_from_slice(&r.m);
        Ok(TwoSiteDensity::from_matrix(a))
    }

    /// `<S^z>` at one site.
    pub fn mz(&self, s: i64) -> f64 {
        let b = self.basis.bit(s);
        self.diagonal(|c| if c & b != 0 { 0.5 } else { -0.5 })
    }

    /// `<sum_l S^z_l>`.
    pub fn total_sz(&self) -> f64 {
        let n = self.basis.n_sites as f64;
        self.diagonal(|c| c.count_ones() as f64 - n / 2.0)
    }

    fn diagonal(&self, f: impl Fn(u64) -> f64) -> f64 {
        let mut acc = 0.0;
        for (w, psi) in &self.components {
            for (i, z) in psi.iter().enumerate() {
                acc += w * z.norm_sqr() * f(self.basis.configs[i]);
            }
        }
        acc
    }
}

fn embed(basis: &Arc<Basis>, amps: &[(u64, C64)]) -> Result<Vec<C64>> {
    let mut psi = vec![C64::new(0.0, 0.0); basis.dim()];
    for &(c, z) in amps {
        let i = basis
            .find(c)
            .ok_or_else(|| Error::Unsupported("initial state outside the oracle basis".into()))?;
        psi[i] += z;
    }
    Ok(psi)
}

fn prepare_product(basis: &Arc<Basis>, prep: &Preparation) -> Result<Option<Register>> {
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    let amps = match *prep {
        Preparation::Vacuum => vec![(0u64, C64::new(1.0, 0.0))],
        Preparation::PsiBell { i, j, phi } => {
            basis.distinct(&[i, j])?;
            vec![(basis.bit(i), h), (basis.bit(j), h * C64::from_polar(1.0, phi))]
        }
        Preparation::PhiBell { i, j, phi } => {
            let both = basis.distinct(&[i, j])?;
            vec![(0, h), (both, h * C64::from_polar(1.0, phi))]
        }
        _ => return Ok(None),
    };
    Ok(Some(Register::pure(basis.clone(), embed(basis, &amps)?)?))
}

/// Full-Hilbert-space oracle for rings of at most [`MAX_SITES`] sites.
#[derive(Debug)]
pub struct Oracle {
    pub params: ModelParams<f64>,
    jw_origin: i64,
    spectral: Spectral,
}

fn ring_size(p: &ModelParams<f64>, cap: usize) -> Result<usize> {
    match p.size {
        ChainSize::FiniteRing(n) | ChainSize::OddRing(n) if n > cap => Err(Error::SizeExceeded(n)),
        ChainSize::FiniteRing(n) | ChainSize::OddRing(n) if n >= 2 => Ok(n),
        _ => Err(Error::InvalidParams("the oracle needs a finite ring of at least two sites".into())),
    }
}

/// Dense `2^N x 2^N` Hamiltonian in the basis of bit masks.
pub fn build_hamiltonian(p: &ModelParams<f64>) -> Result<Mat<f64>> {
    let n = ring_size(p, MAX_SITES)?;
    let dim = 1usize << n;
    let mut h = Mat::<f64>::zeros(dim, dim);
    for c in 0..dim as u64 {
        let (d, off) = hamiltonian_column(n, p.lambda, p.gamma, true, c);
        h[(c as usize, c as usize)] += d;
        for (c2, amp) in off {
            h[(c2 as usize, c as usize)] += amp;
        }
    }
    Ok(h)
}

impl Oracle {
    /// Diagonalizes the ring Hamiltonian in its two parity blocks.
    pub fn new(p: &ModelParams<f64>) -> Result<Self> {
        let n = ring_size(p, MAX_SITES)?;
        let basis = Arc::new(Basis::full(n));
        let spectral = Spectral::build(basis, p.lambda, p.gamma, true, |c| (c.count_ones() % 2) as usize)?;
        Ok(Self { params: *p, jw_origin: 1, spectral })
    }

    /// Moves the Jordan-Wigner string origin (default: site 1).
    pub fn with_jw_origin(mut self, site: i64) -> Self {
        self.jw_origin = site;
        self
    }

    pub fn n_sites(&self) -> usize {
        self.spectral.basis.n_sites
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.spectral.basis
    }

    /// All eigenvalues, ascending.
    pub fn energies(&self) -> Vec<f64> {
        self.spectral.energies()
    }

    /// Lowest eigenpair over both parity blocks.
    pub fn ground_state(&self) -> (f64, Register) {
        let (e, psi) = self.spectral.ground();
        (e, Register { basis: self.basis().clone(), components: vec![(1.0, psi)] })
    }

    pub fn prepare(&self, prep: &Preparation) -> Result<Register> {
        if let Some(r) = prepare_product(self.basis(), prep)? {
            return Ok(r);
        }
        let (_, gs) = self.ground_state();
        match *prep {
            Preparation::GroundState => Ok(gs),
            Preparation::SingletKnittedGs { i, j } => self.knit_singlet(&gs.components[0].1, i, j),
            _ => unreachable!(),
        }
    }

    /// `sum_{mu nu} |s><mu nu|GS> <GS|mu nu><s|` with the singlet on `(i, j)`.
    fn knit_singlet(&self, gs: &[C64], i: i64, j: i64) -> Result<Register> {
        let basis = self.basis();
        let both = basis.distinct(&[i, j])?;
        let (bi, bj) = (basis.bit(i), basis.bit(j));
        let h = FRAC_1_SQRT_2;
        let mut components = Vec::new();
        for local in [0, bi, bj, both] {
            let mut v = vec![C64::new(0.0, 0.0); basis.dim()];
            let mut weight = 0.0;
            for (c, z) in gs.iter().enumerate() {
                let c = c as u64;
                if c & both != local {
                    continue;
                }
                weight += z.norm_sqr();
                let rest = c & !both;
                v[(rest | bi) as usize] += z * h;
                v[(rest | bj) as usize] -= z * h;
            }
            if weight > 0.0 {
                let norm = weight.sqrt();
                v.iter_mut().for_each(|z| *z /= norm);
                components.push((weight, v));
            }
        }
        let total: f64 = components.iter().map(|c| c.0).sum();
        components.iter_mut().for_each(|c| c.0 /= total);
        Register::mixture(basis.clone(), components)
    }

    /// `e^{-iHt}` applied to every component.
    pub fn evolve(&self, reg: &Register, t: f64) -> Register {
        let components = reg.components.iter().map(|(w, v)| (*w, self.spectral.evolve_vec(v, t))).collect();
        Register { basis: reg.basis.clone(), components }
    }

    /// `<H>`.
    pub fn energy(&self, reg: &Register) -> f64 {
        let n = self.n_sites();
        let mut acc = 0.0;
        for (w, psi) in &reg.components {
            for (c, z) in psi.iter().enumerate() {
                let (d, off) = hamiltonian_column(n, self.params.lambda, self.params.gamma, true, c as u64);
                let mut hz = C64::new(d, 0.0) * psi[c].conj();
                for (c2, amp) in off {
                    hz += psi[c2 as usize].conj() * amp;
                }
                acc += w * (hz * z).re;
            }
        }
        acc
    }

    /// Applies `A_l` or `B_l` with the string running from the origin to the site.
    fn apply_majorana(&self, x: Majorana, psi: &[C64]) -> Vec<C64> {
        let basis = self.basis();
        let n = basis.n_sites as u32;
        let origin = basis.position(self.jw_origin);
        let pos = basis.position(x.site);
        let len = (pos + n - origin) % n;
        let mut string = 0u64;
        for q in 0..len {
            string |= 1 << ((origin + q) % n);
        }
        let bit = 1u64 << pos;
        let mut out = vec![C64::new(0.0, 0.0); psi.len()];
        for (c, z) in psi.iter().enumerate() {
            let c = c as u64;
            // -sigma^z is +1 on down spins
            let mut f = if (c & string).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            let up = c & bit != 0;
            let phase = match x.kind {
                MajoranaKind::A => C64::new(f, 0.0),
                // i sigma^y: up -> -down, down -> +up
                MajoranaKind::B => {
                    if up {
                        f = -f;
                    }
                    C64::new(f, 0.0)
                }
            };
            out[(c ^ bit) as usize] += phase * z;
        }
        out
    }

    /// `<X Y>` for Majoranas defined with this oracle's string origin.
    pub fn majorana_contraction(&self, reg: &Register, x: Majorana, y: Majorana) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (w, psi) in &reg.components {
            let ypsi = self.apply_majorana(y, psi);
            let xypsi = self.apply_majorana(x, &ypsi);
            acc += psi.iter().zip(&xypsi).map(|(a, b)| a.conj() * b).sum::<C64>() * *w;
        }
        acc
    }
}

/// Isotropic (`gamma = 0`) oracle restricted to at most two flipped spins, for rings of up
/// to [`MAX_SECTOR_SITES`] sites.
///
/// The field term commutes with the Hamiltonian and is left out: states evolve under the
/// exchange term alone, i.e. in the frame co-rotating with the field.
#[derive(Debug)]
pub struct SectorOracle {
    pub lambda: f64,
    spectral: Spectral,
}

impl SectorOracle {
    pub fn new(lambda: f64, n_sites: usize, max_flips: u32) -> Result<Self> {
        if n_sites > MAX_SECTOR_SITES {
            return Err(Error::SizeExceeded(n_sites));
        }
        if n_sites < 3 || !(1..=2).contains(&max_flips) || !(lambda >= 0.0) {
            return Err(Error::InvalidParams(format!("sector oracle: {n_sites} sites, {max_flips} flips, lambda {lambda}")));
        }
        let basis = Arc::new(Basis::few_flips(n_sites, max_flips));
        let spectral = Spectral::build(basis, lambda, 0.0, false, |c| c.count_ones() as usize)?;
        Ok(Self { lambda, spectral })
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.spectral.basis
    }

    /// Supports the vacuum and the two Bell families.
    pub fn prepare(&self, prep: &Preparation) -> Result<Register> {
        prepare_product(self.basis(), prep)?
            .ok_or_else(|| Error::Unsupported(format!("{prep:?} on the isotropic sector oracle")))
    }

    pub fn evolve(&self, reg: &Register, t: f64) -> Register {
        let components = reg.components.iter().map(|(w, v)| (*w, self.spectral.evolve_vec(v, t))).collect();
        Register { basis: reg.basis.clone(), components }
    }
}
