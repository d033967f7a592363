//! Independent ground truth for everything the effective-Hamiltonian
//! machinery claims: brute-force Rayleigh–Schrödinger perturbation theory
//! (closed forms to fourth order plus a graded multi-operator recursion)
//! and exact diagonalization on truncated Fock bases.
//!
//! The full Hamiltonian is H = H₀ + Σ_X μ_X·E(R_X), one interaction term
//! per atom X, assembled over a product basis of per-atom levels and a
//! shared photon occupation. The overall sign of the coupling is
//! conventional and drops out of every quantity compared here (all are of
//! even order in the coupling).

use std::collections::BTreeMap;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::discrete::{dipole_field_element, DiscreteModeSet, FockOccupation, ProductState, BASIS_CAP};
use crate::error::{MqedError, Result};
use crate::model::{AtomModel, PhysicalConstants};

/// Relative gap below which the RS target state counts as degenerate.
/// Kept small so that quasi-static mode sets (photon energies many orders
/// of magnitude below the atomic gaps) still pass the guard.
pub const DEGENERACY_REL_TOL: f64 = 1e-11;

/// A joint state of several atoms and the shared field: one level index per
/// atom plus a photon occupation table.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiAtomState {
    pub levels: Vec<usize>,
    pub field: FockOccupation,
}

impl MultiAtomState {
    pub fn energy(
        &self,
        modes: &DiscreteModeSet,
        atoms: &[AtomModel],
        pc: &PhysicalConstants,
    ) -> f64 {
        let atomic: f64 = self
            .levels
            .iter()
            .zip(atoms)
            .map(|(&l, atom)| atom.energy(l))
            .sum();
        let photons: f64 = (0..self.field.num_modes())
            .map(|s| self.field.count(s) as f64 * pc.hbar * modes.omega(s))
            .sum();
        atomic + photons
    }
}

/// A dense operator over an explicit basis.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    pub basis: Vec<MultiAtomState>,
    pub matrix: DMatrix<Complex64>,
}

impl DenseOperator {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn diagonal_real(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).collect()
    }
}

/// All multi-atom product states with total photons ≤ `max_photons`,
/// ordered lexicographically in (total photons, occupation, level tuple).
pub fn multi_atom_basis(
    modes: &DiscreteModeSet,
    atoms: &[AtomModel],
    max_photons: u32,
) -> Result<Vec<MultiAtomState>> {
    let mut occs = Vec::new();
    for total in 0..=max_photons {
        let mut batch = Vec::new();
        compositions(total, modes.len(), &mut Vec::new(), &mut batch);
        batch.sort();
        occs.extend(batch);
    }
    let mut out = Vec::new();
    for occ in &occs {
        let mut levels = vec![0usize; atoms.len()];
        loop {
            out.push(MultiAtomState {
                levels: levels.clone(),
                field: FockOccupation::from_counts(occ.clone()),
            });
            if out.len() > BASIS_CAP {
                return Err(MqedError::BasisTooLarge { size: out.len(), cap: BASIS_CAP });
            }
            // odometer increment over the per-atom level indices
            let mut carry = true;
            for (x, l) in levels.iter_mut().enumerate().rev() {
                if !carry {
                    break;
                }
                *l += 1;
                if *l < atoms[x].num_levels() {
                    carry = false;
                } else {
                    *l = 0;
                }
            }
            if carry {
                break;
            }
        }
    }
    Ok(out)
}

fn compositions(remaining: u32, slots: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if slots == 0 {
        if remaining == 0 {
            out.push(prefix.clone());
        }
        return;
    }
    for n in 0..=remaining {
        prefix.push(n);
        compositions(remaining - n, slots - 1, prefix, out);
        prefix.pop();
    }
}

/// Index of a given state in the enumerated basis.
pub fn find_state(basis: &[MultiAtomState], levels: &[usize], occ: &FockOccupation) -> Option<usize> {
    basis
        .iter()
        .position(|s| s.levels == levels && &s.field == occ)
}

/// Interaction matrix μ_X·E(R_X) for one atom; nonzero only between states
/// whose other atoms agree and whose occupations differ by one photon.
pub fn interaction_matrix(
    basis: &[MultiAtomState],
    modes: &DiscreteModeSet,
    atoms: &[AtomModel],
    atom_index: usize,
) -> DMatrix<Complex64> {
    let n = basis.len();
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for (i, a) in basis.iter().enumerate() {
        for (j, b) in basis.iter().enumerate() {
            let spectators_agree = a
                .levels
                .iter()
                .zip(&b.levels)
                .enumerate()
                .all(|(x, (la, lb))| x == atom_index || la == lb);
            if !spectators_agree {
                continue;
            }
            let bra = ProductState::new(a.levels[atom_index], a.field.clone());
            let ket = ProductState::new(b.levels[atom_index], b.field.clone());
            m[(i, j)] = dipole_field_element(&bra, &ket, modes, &atoms[atom_index], atom_index);
        }
    }
    m
}

/// Assemble (H₀, H_I) over the enumerated basis: H₀ diagonal with the
/// unperturbed energies, H_I the sum of one coupling term per atom.
pub fn build_hamiltonian(
    modes: &DiscreteModeSet,
    atoms: &[AtomModel],
    max_photons: u32,
    pc: &PhysicalConstants,
) -> Result<(DenseOperator, DenseOperator)> {
    let basis = multi_atom_basis(modes, atoms, max_photons)?;
    let n = basis.len();
    let mut h0 = DMatrix::<Complex64>::zeros(n, n);
    for (i, s) in basis.iter().enumerate() {
        h0[(i, i)] = Complex64::new(s.energy(modes, atoms, pc), 0.0);
    }
    let mut hi = DMatrix::<Complex64>::zeros(n, n);
    for x in 0..atoms.len() {
        hi += interaction_matrix(&basis, modes, atoms, x);
    }
    Ok((
        DenseOperator { basis: basis.clone(), matrix: h0 },
        DenseOperator { basis, matrix: hi },
    ))
}

fn check_nondegenerate(energies: &[f64], state: usize) -> Result<()> {
    let e0 = energies[state];
    let scale = energies.iter().fold(0.0f64, |m, e| m.max(e.abs())).max(1e-300);
    for (k, &e) in energies.iter().enumerate() {
        if k != state && (e - e0).abs() < DEGENERACY_REL_TOL * scale {
            return Err(MqedError::Degeneracy {
                a: state,
                b: k,
                gap: (e - e0).abs() / scale,
            });
        }
    }
    Ok(())
}

/// Nondegenerate RS energy corrections E⁽¹⁾…E⁽ᵒʳᵈᵉʳ⁾ of a target state,
/// from the standard sum-over-states closed forms (fourth order includes
/// the wavefunction-renormalization term).
pub fn rs_perturbation_energy(
    h0: &DenseOperator,
    v: &DenseOperator,
    state: usize,
    order: usize,
) -> Result<Vec<f64>> {
    if !(1..=4).contains(&order) {
        return Err(MqedError::InvalidArgument(format!("RS order must be 1..=4, got {order}")));
    }
    let energies = h0.diagonal_real();
    check_nondegenerate(&energies, state)?;
    let n = energies.len();
    let e0 = energies[state];
    let vm = &v.matrix;
    let e1 = vm[(state, state)].re;

    // resolvent-weighted first-order vector: x1[k] = V_k0 / (E0 - E_k)
    let mut x1 = DVector::<Complex64>::zeros(n);
    for k in 0..n {
        if k != state {
            x1[k] = vm[(k, state)] / (e0 - energies[k]);
        }
    }
    let row0 = vm.row(state);
    let e2 = (row0 * &x1)[(0, 0)].re;
    let mut out = vec![e1, e2];

    if order >= 3 {
        // V̄ = V − E1 on the complement
        let vbar = {
            let mut m = vm.clone();
            for k in 0..n {
                m[(k, k)] -= Complex64::new(e1, 0.0);
            }
            m
        };
        let project = |mut v: DVector<Complex64>| {
            v[state] = Complex64::new(0.0, 0.0);
            v
        };
        let resolvent = |v: DVector<Complex64>| {
            let mut out = v;
            for k in 0..n {
                if k != state {
                    out[k] /= e0 - energies[k];
                } else {
                    out[k] = Complex64::new(0.0, 0.0);
                }
            }
            out
        };
        let x2 = resolvent(project(&vbar * &x1));
        let e3 = (row0 * &x2)[(0, 0)].re;
        out.push(e3);
        if order >= 4 {
            let x3 = resolvent(project(&vbar * &x2));
            let main = (row0 * &x3)[(0, 0)].re;
            let norm2: f64 = (0..n).map(|k| x1[k].norm_sqr()).sum();
            out.push(main - e2 * norm2);
        }
    }
    out.truncate(order);
    Ok(out)
}

/// Graded RS recursion for H = H₀ + Σ_X V_X: energy corrections indexed by
/// the multidegree (n₁, …, n_g) counting powers of each V_X, up to total
/// order `max_order`. Summing a shell Σ_{|m|=n} E_m reproduces the plain
/// n-th-order correction; individual entries isolate cross terms (e.g. the
/// two-atom dispersion energy at grade (2,2)) without numerical
/// subtraction of separate runs.
pub fn rs_graded(
    h0: &DenseOperator,
    vs: &[DMatrix<Complex64>],
    state: usize,
    max_order: usize,
) -> Result<BTreeMap<Vec<u32>, f64>> {
    let energies = h0.diagonal_real();
    check_nondegenerate(&energies, state)?;
    let n = energies.len();
    let g = vs.len();
    let e0 = energies[state];

    let mut psi: BTreeMap<Vec<u32>, DVector<Complex64>> = BTreeMap::new();
    let mut psi0 = DVector::<Complex64>::zeros(n);
    psi0[state] = Complex64::new(1.0, 0.0);
    psi.insert(vec![0; g], psi0);
    let mut corrections: BTreeMap<Vec<u32>, f64> = BTreeMap::new();

    for total in 1..=max_order as u32 {
        let mut shell = Vec::new();
        compositions(total, g, &mut Vec::new(), &mut shell);
        for m in shell {
            // RHS of (E0 − H0)|ψ_m⟩ = Σ_X V_X |ψ_{m−e_X}⟩ − Σ_{0<k≤m} E_k |ψ_{m−k}⟩
            let mut rhs = DVector::<Complex64>::zeros(n);
            for (x, v) in vs.iter().enumerate() {
                if m[x] == 0 {
                    continue;
                }
                let mut prev = m.clone();
                prev[x] -= 1;
                rhs += v * &psi[&prev];
            }
            // intermediate normalization: E_m is the ground-row component
            let e_m = rhs[state];
            if e_m.im.abs() > 1e-9 * e_m.re.abs().max(1e-300) {
                return Err(MqedError::InvalidArgument(format!(
                    "non-real graded energy correction at {m:?}: {e_m}"
                )));
            }
            for (k, &e_k) in &corrections {
                if k.iter().zip(&m).all(|(a, b)| a <= b) {
                    let diff: Vec<u32> = m.iter().zip(k).map(|(a, b)| a - b).collect();
                    rhs -= &psi[&diff] * Complex64::new(e_k, 0.0);
                }
            }
            let mut psi_m = DVector::<Complex64>::zeros(n);
            for i in 0..n {
                if i != state {
                    psi_m[i] = rhs[i] / (e0 - energies[i]);
                }
            }
            corrections.insert(m.clone(), e_m.re);
            psi.insert(m, psi_m);
        }
    }
    Ok(corrections)
}

/// Full spectrum of a Hermitian operator, eigenvalues ascending, plus the
/// ground eigenvector.
pub fn exact_diagonalize(h: &DenseOperator) -> Result<(Vec<f64>, DVector<Complex64>)> {
    let m = &h.matrix;
    let scale = m.norm().max(1e-300);
    if (m - m.adjoint()).norm() > 1e-12 * scale {
        return Err(MqedError::InvalidArgument("matrix is not Hermitian".into()));
    }
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let ground = eig.eigenvectors.column(order[0]).into_owned();
    Ok((values, ground))
}

/// Outcome of the central-equivalence check: fourth-order RS cross energy
/// with the full coupling vs. the second-order energy from the two-photon
/// effective Hamiltonian on the same discrete mode set.
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub fourth_order_cross: f64,
    pub effective_second_order: f64,
    pub relative_difference: f64,
    pub basis_size: usize,
    pub runtime_s: f64,
}

/// Fourth-order RS energy bilinear in the two atoms' couplings — grade
/// (2, 2) of the graded recursion — against the Eq.-(29)-style dispersion
/// sum built from the effective Hamiltonian.
///
/// On a finite mode set the two sides agree up to corrections of relative
/// order ħω/E (photon energy over atomic gap): the effective sum keeps only
/// two-photon intermediate states with polarizability-style denominators,
/// while the fourth-order recursion also walks single-photon and
/// doubly-excited paths whose contributions cancel against the denominator
/// difference only at leading order in ħω/E. The match becomes exact in the
/// static limit and, independently, in the continuum limit, where contour
/// relabeling of the mode integral removes the remainder. Quasi-static mode
/// sets therefore reproduce the equivalence to essentially machine
/// precision; mode frequencies comparable to atomic gaps leave an O(ħω/E)
/// residual that this report surfaces rather than hides.
pub fn compare_effective_vs_fourth_order(
    model_a: &AtomModel,
    model_b: &AtomModel,
    modes: &DiscreteModeSet,
    pc: &PhysicalConstants,
) -> Result<ComparisonReport> {
    let start = Instant::now();
    let atoms = [model_a.clone(), model_b.clone()];
    let basis = multi_atom_basis(modes, &atoms, 2)?;
    let n = basis.len();
    let mut h0m = DMatrix::<Complex64>::zeros(n, n);
    for (i, s) in basis.iter().enumerate() {
        h0m[(i, i)] = Complex64::new(s.energy(modes, &atoms, pc), 0.0);
    }
    let h0 = DenseOperator { basis: basis.clone(), matrix: h0m };
    let va = interaction_matrix(&basis, modes, &atoms, 0);
    let vb = interaction_matrix(&basis, modes, &atoms, 1);
    let ground = find_state(
        &basis,
        &[model_a.ground_index(), model_b.ground_index()],
        &FockOccupation::vacuum(modes.len()),
    )
    .expect("vacuum ground state present in basis");
    let graded = rs_graded(&h0, &[va, vb], ground, 4)?;
    let fourth = graded[&vec![2, 2]];

    let effective =
        crate::shifts::dispersion_two_atom_discrete(model_a, model_b, modes, pc)?.value;
    let denom = fourth.abs().max(effective.abs()).max(1e-300);
    Ok(ComparisonReport {
        fourth_order_cross: fourth,
        effective_second_order: effective,
        relative_difference: (fourth - effective).abs() / denom,
        basis_size: n,
        runtime_s: start.elapsed().as_secs_f64(),
    })
}
