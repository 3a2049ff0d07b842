//! Dense exact diagonalization of the periodic fermion chain.
//!
//! Sites are ordered by index and `c_j^dag` picks up `(-1)^(number of
//! occupied sites i < j)`. The Hamiltonian, with `J = 1`, is
//!
//! ```text
//! H = sum_j [ (c_j^dag c_{j+1} + h.c.) / 2 + gamma (c_j^dag c_{j+1}^dag + h.c.) / 2 - g n_j ]
//! ```
//!
//! with site `N` identified with site `0`. This is the lattice form whose
//! Bogoliubov vacuum fills up as `g -> infinity`, matching the spectrum
//! module; relative to writing the bracket with an overall `-J/2` it
//! corresponds to `J -> -J` and drops the constant `N g / 2`.
//!
//! `H` conserves fermion parity, so the two parity blocks (each `2^{N-1}`)
//! are diagonalized separately and merged.

use faer::{Mat, Side};
use num_complex::Complex64;

use crate::counting::CountDistribution;
use crate::error::{invalid, Error, Result};
use crate::oracle::fock::{binomial_thinning, number_distribution, FockState, ModeBasis};
use crate::params::ModelParams;

pub const MAX_ORACLE_SITES: usize = 12;
/// Levels closer than this to the ground energy are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// `c_j^dag` on basis state `s`, or `None` if site `j` is occupied.
pub fn create(s: u32, j: usize) -> Option<(f64, u32)> {
    if s >> j & 1 == 1 {
        return None;
    }
    Some((jw_sign(s, j), s | 1 << j))
}

/// `c_j` on basis state `s`, or `None` if site `j` is empty.
pub fn annihilate(s: u32, j: usize) -> Option<(f64, u32)> {
    if s >> j & 1 == 0 {
        return None;
    }
    Some((jw_sign(s, j), s & !(1 << j)))
}

fn jw_sign(s: u32, j: usize) -> f64 {
    if (s & ((1u32 << j) - 1)).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Create(usize),
    Annihilate(usize),
}

/// Apply a product of operators, rightmost first.
fn apply(ops: &[Op], mut s: u32) -> Option<(f64, u32)> {
    let mut sign = 1.0;
    for op in ops.iter().rev() {
        let (sg, t) = match *op {
            Op::Create(j) => create(s, j)?,
            Op::Annihilate(j) => annihilate(s, j)?,
        };
        sign *= sg;
        s = t;
    }
    Some((sign, s))
}

fn terms(params: &ModelParams) -> Vec<(f64, Vec<Op>)> {
    use Op::*;
    let n = params.n_sites;
    let (hop, pair) = (0.5, 0.5 * params.gamma);
    let mut out = Vec::with_capacity(5 * n);
    for j in 0..n {
        let k = (j + 1) % n;
        out.push((hop, vec![Create(j), Annihilate(k)]));
        out.push((hop, vec![Create(k), Annihilate(j)]));
        out.push((pair, vec![Create(j), Create(k)]));
        out.push((pair, vec![Annihilate(k), Annihilate(j)]));
        out.push((-params.g, vec![Create(j), Annihilate(j)]));
    }
    out
}

/// Dense Hamiltonian restricted to basis states of the given parity,
/// together with the basis states in block order.
fn parity_block(params: &ModelParams, odd: bool) -> (Vec<u32>, Mat<f64>) {
    let n = params.n_sites;
    let states: Vec<u32> = (0..1u32 << n)
        .filter(|s| (s.count_ones() % 2 == 1) == odd)
        .collect();
    let mut index = vec![usize::MAX; 1 << n];
    for (i, &s) in states.iter().enumerate() {
        index[s as usize] = i;
    }
    let mut h = Mat::<f64>::zeros(states.len(), states.len());
    let terms = terms(params);
    for (col, &s) in states.iter().enumerate() {
        for (coef, ops) in &terms {
            if *coef == 0.0 {
                continue;
            }
            if let Some((sign, t)) = apply(ops, s) {
                h[(index[t as usize], col)] += coef * sign;
            }
        }
    }
    (states, h)
}

/// Lowest level of the lattice Hamiltonian.
#[derive(Debug, Clone)]
pub struct RealSpaceGround {
    pub energy: f64,
    /// Distance to the first level above the ground space.
    pub gap: f64,
    /// Orthonormal basis of the ground space; more than one entry when
    /// degenerate.
    pub states: Vec<FockState>,
}

impl RealSpaceGround {
    pub fn degenerate(&self) -> bool {
        self.states.len() > 1
    }

    pub fn state(&self) -> &FockState {
        &self.states[0]
    }

    /// Counting distribution of the (first) ground state.
    pub fn distribution(&self, kappa: f64, mask: Option<&[bool]>) -> Result<CountDistribution> {
        binomial_thinning(&number_distribution(self.state(), mask)?, kappa)
    }

    /// Entrywise lower and upper envelope of the counting distributions of
    /// all ground-space basis vectors.
    pub fn distribution_range(
        &self,
        kappa: f64,
        mask: Option<&[bool]>,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut lo: Option<Vec<f64>> = None;
        let mut hi: Option<Vec<f64>> = None;
        for st in &self.states {
            let d = binomial_thinning(&number_distribution(st, mask)?, kappa)?.into_probs();
            lo = Some(match lo {
                None => d.clone(),
                Some(l) => l.iter().zip(&d).map(|(a, b)| a.min(*b)).collect(),
            });
            hi = Some(match hi {
                None => d,
                Some(h) => h.iter().zip(&d).map(|(a, b)| a.max(*b)).collect(),
            });
        }
        Ok((lo.unwrap_or_default(), hi.unwrap_or_default()))
    }
}

pub fn real_space_ground_state(params: &ModelParams) -> Result<RealSpaceGround> {
    params.validate()?;
    let n = params.n_sites;
    if n > MAX_ORACLE_SITES {
        return Err(Error::OracleTooLarge {
            size: n,
            limit: MAX_ORACLE_SITES,
        });
    }
    if params.gamma.abs() > 1e6 || params.g.abs() > 1e6 {
        return Err(invalid("params", "couplings too large for a dense solve"));
    }

    // (energy, parity block, column) of every level.
    let mut levels = Vec::with_capacity(1 << n);
    let mut blocks = Vec::with_capacity(2);
    for odd in [false, true] {
        let (states, h) = parity_block(params, odd);
        let eig = h
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Eigen(format!("{e:?}")))?;
        let values = eig.S().column_vector();
        for i in 0..states.len() {
            levels.push((values[i], blocks.len(), i));
        }
        blocks.push((states, eig.U().to_owned()));
    }
    levels.sort_by(|a, b| a.0.total_cmp(&b.0));

    let energy = levels[0].0;
    let ground: Vec<_> = levels
        .iter()
        .take_while(|l| l.0 - energy < DEGENERACY_TOL)
        .collect();
    let gap = levels
        .get(ground.len())
        .map_or(f64::INFINITY, |l| l.0 - energy);
    let states = ground
        .iter()
        .map(|&&(_, b, col)| {
            let (basis, vecs) = &blocks[b];
            let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
            for (row, &s) in basis.iter().enumerate() {
                amps[s as usize] = Complex64::new(vecs[(row, col)], 0.0);
            }
            FockState::new(amps, n, ModeBasis::Sites)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RealSpaceGround {
        energy,
        gap,
        states,
    })
}

/// Boolean mask selecting the even sites of an `n`-site chain.
pub fn even_sites(n: usize) -> Vec<bool> {
    (0..n).map(|j| j % 2 == 0).collect()
}
