//! Closed-form rate enhancements, the golden-rule oracle, and the
//! anharmonic interpolation between oscillators and spins.
//!
//! All enhancements are ratios `gamma / gamma0`, where `gamma0` is the rate
//! for a single excitation on a single site. The oracle evaluates
//! `sum_f |<f|C|i>|^2` by completeness as `||C|i>||^2` and divides by the
//! squared single-site element.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dicke::{ho_collective_state, spin_multiplet, HoDickeLabel, SpinDickeLabel};
use crate::error::{invalid, Error, Result};
use crate::fockspace::{
    build_hamiltonian, collective_op, enumerate_sector, site_op, BasisSector, CollectiveOp,
    HamiltonianSpec, SectorKind, SparseOperator, StateVector,
};
use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Process {
    /// Emission from an aggregate into the empty field.
    SR,
    /// Absorption of one photon by an aggregate.
    SA,
    /// Transfer of one excitation from a donor to an acceptor aggregate.
    ST,
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Process::SR => "SR",
            Process::SA => "SA",
            Process::ST => "ST",
        };
        f.write_str(s)
    }
}

/// One side of a transition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Aggregate {
    Spin(SpinDickeLabel),
    Ho(HoDickeLabel),
    /// Single radiation mode holding `photons` quanta.
    Field { photons: usize },
}

impl Aggregate {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Aggregate::Spin(_) => "spin",
            Aggregate::Ho(_) => "ho",
            Aggregate::Field { .. } => "field",
        }
    }

    pub fn n_sites(&self) -> usize {
        match self {
            Aggregate::Spin(l) => l.n_sites,
            Aggregate::Ho(l) => l.n_sites,
            Aggregate::Field { .. } => 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Aggregate::Spin(l) => l.validate(),
            Aggregate::Ho(l) => l.validate(),
            Aggregate::Field { .. } => Ok(()),
        }
    }

    /// Enhancement factor for giving up one excitation.
    fn emitting_factor(&self) -> Option<f64> {
        match self {
            Aggregate::Spin(SpinDickeLabel { n_sites, l, m }) => {
                let (n, l, m) = (*n_sites as i64, *l as i64, *m as i64);
                Some(((l + m - n) * (l - m + 1)) as f64)
            }
            Aggregate::Ho(label) => Some((label.n_sites * label.r) as f64),
            Aggregate::Field { .. } => None,
        }
    }

    /// Enhancement factor for taking up one excitation.
    fn absorbing_factor(&self) -> Option<f64> {
        match self {
            Aggregate::Spin(SpinDickeLabel { n_sites, l, m }) => {
                let (n, l, m) = (*n_sites as i64, *l as i64, *m as i64);
                Some(((l + m - n + 1) * (l - m)) as f64)
            }
            Aggregate::Ho(label) => Some((label.n_sites * (label.r + 1)) as f64),
            Aggregate::Field { .. } => None,
        }
    }
}

impl fmt::Display for Aggregate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Aggregate::Spin(l) => write!(f, "spin{l}"),
            Aggregate::Ho(l) => write!(f, "ho{l}"),
            Aggregate::Field { photons } => write!(f, "field|{photons}>"),
        }
    }
}

/// Dimensionless rate `gamma / gamma0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct RateEnhancement(f64);

impl RateEnhancement {
    pub fn new(value: f64) -> Result<Self> {
        if value >= 0.0 && value.is_finite() {
            Ok(RateEnhancement(value))
        } else {
            Err(invalid(format!("rate enhancement must be finite and non-negative, got {value}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for RateEnhancement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Closed-form enhancement for the transitions of the summary table.
///
/// Spins emit with `(l+m-N)(l-m+1)` and absorb with `(l+m-N+1)(l-m)`;
/// oscillators emit with `N R` and absorb with `N (R+1)`. Transfer is the
/// donor's emitting factor times the acceptor's absorbing factor.
pub fn closed_form_enhancement(
    process: Process,
    donor: &Aggregate,
    acceptor: &Aggregate,
) -> Result<RateEnhancement> {
    donor.validate()?;
    acceptor.validate()?;
    let unsupported = || {
        Error::UnsupportedCombination(format!("{process} from {donor} to {acceptor}"))
    };
    let value = match (process, donor, acceptor) {
        (Process::SR, d, Aggregate::Field { photons: 0 }) => {
            d.emitting_factor().ok_or_else(unsupported)?
        }
        (Process::SA, Aggregate::Field { photons: 1 }, a) => {
            a.absorbing_factor().ok_or_else(unsupported)?
        }
        (Process::ST, d, a) => {
            d.emitting_factor().ok_or_else(unsupported)? * a.absorbing_factor().ok_or_else(unsupported)?
        }
        _ => return Err(unsupported()),
    };
    RateEnhancement::new(value)
}

/// `<0|b|1>` for a single site of the given kind, the element defining `gamma0`.
pub fn reference_element(kind: SectorKind) -> Result<Complex64> {
    let one = enumerate_sector(kind, 1, 1, None)?;
    let lower = site_op(&one, 0, false)?;
    let excited = StateVector::basis(one, 0)?;
    Ok(lower.apply(&excited)?.amplitudes()[0])
}

/// `||C |i>||^2 / |ref|^2`.
pub fn golden_rule_enhancement(
    initial: &StateVector,
    coupling: &SparseOperator,
    reference: Complex64,
) -> Result<RateEnhancement> {
    if **coupling.domain() != **initial.sector() {
        return Err(Error::SectorMismatch(format!(
            "coupling acts on {:?}, state lives in {:?}",
            coupling.domain(),
            initial.sector()
        )));
    }
    let r = reference.norm_sqr();
    if r == 0.0 {
        return Err(invalid("reference matrix element is zero"));
    }
    RateEnhancement::new(coupling.apply(initial)?.norm_sqr() / r)
}

fn lowering(sector: &Arc<BasisSector>) -> Result<SparseOperator> {
    match sector.kind() {
        SectorKind::Spin => collective_op(sector, CollectiveOp::JMinus),
        SectorKind::Ho => collective_op(sector, CollectiveOp::ALower),
    }
}

fn raising(sector: &Arc<BasisSector>) -> Result<SparseOperator> {
    match sector.kind() {
        SectorKind::Spin => collective_op(sector, CollectiveOp::JPlus),
        SectorKind::Ho => collective_op(sector, CollectiveOp::ARaise),
    }
}

/// Oracle for emitting one excitation into the empty field.
pub fn emission_oracle(state: &StateVector) -> Result<RateEnhancement> {
    let kind = state.sector().kind();
    golden_rule_enhancement(state, &lowering(state.sector())?, reference_element(kind)?)
}

/// Oracle for absorbing one photon.
pub fn absorption_oracle(state: &StateVector) -> Result<RateEnhancement> {
    let kind = state.sector().kind();
    golden_rule_enhancement(state, &raising(state.sector())?, reference_element(kind)?)
}

/// Oracle for donor-to-acceptor transfer in the product space.
///
/// The coupling `L_D (x) R_A` is applied entry by entry to the Kronecker
/// product of the two states, so no factorisation of the rate is assumed.
pub fn transfer_oracle(donor: &StateVector, acceptor: &StateVector) -> Result<RateEnhancement> {
    let l = lowering(donor.sector())?;
    let r = raising(acceptor.sector())?;
    transfer_oracle_with(&l, donor, &r, acceptor)
}

fn transfer_oracle_with(
    l: &SparseOperator,
    donor: &StateVector,
    r: &SparseOperator,
    acceptor: &StateVector,
) -> Result<RateEnhancement> {
    if **l.domain() != **donor.sector() || **r.domain() != **acceptor.sector() {
        return Err(Error::SectorMismatch("transfer coupling does not match the states".into()));
    }
    let (da, ra) = (acceptor.dim(), r.codomain().dim());
    let psi: Vec<Complex64> = donor
        .amplitudes()
        .iter()
        .flat_map(|d| acceptor.amplitudes().iter().map(move |a| d * a))
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); l.codomain().dim() * ra];
    for &(r1, c1, v1) in l.entries() {
        for &(r2, c2, v2) in r.entries() {
            out[r1 * ra + r2] += v1 * v2 * psi[c1 * da + c2];
        }
    }
    let reference = reference_element(donor.sector().kind())?.norm_sqr()
        * reference_element(acceptor.sector().kind())?.norm_sqr();
    RateEnhancement::new(out.iter().map(|x| x.norm_sqr()).sum::<f64>() / reference)
}

/// Upper bound on an enhancement over all states of the participants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MaxEnhancement {
    Finite(f64),
    /// An oscillator participant can hold any number of quanta.
    Unbounded,
}

/// Maximum over Dicke states for the given participant kinds and sizes.
///
/// `participants` is the emitting aggregate for SR, the absorbing one for
/// SA, and `[donor, acceptor]` for ST. Spin maxima are taken over the
/// bright ladder; for odd `N` the emitting maximum sits at `m = (N+1)/2` and
/// the absorbing one at `m = (N-1)/2`.
pub fn max_enhancement(process: Process, participants: &[(SectorKind, usize)]) -> Result<MaxEnhancement> {
    let expected = if process == Process::ST { 2 } else { 1 };
    if participants.len() != expected {
        return Err(invalid(format!(
            "{process} takes {expected} aggregate(s), got {}",
            participants.len()
        )));
    }
    if participants.iter().any(|&(_, n)| n == 0) {
        return Err(invalid("aggregate sizes must be positive"));
    }
    if participants.iter().any(|&(k, _)| k == SectorKind::Ho) {
        return Ok(MaxEnhancement::Unbounded);
    }
    let emit = |n: usize| (1..=n).map(|m| m * (n - m + 1)).max().unwrap_or(0) as f64;
    let absorb = |n: usize| (0..n).map(|m| (m + 1) * (n - m)).max().unwrap_or(0) as f64;
    let value = match process {
        Process::SR => emit(participants[0].1),
        Process::SA => absorb(participants[0].1),
        Process::ST => emit(participants[0].1) * absorb(participants[1].1),
    };
    Ok(MaxEnhancement::Finite(value))
}

/// Forward minus backward transfer rate.
pub fn net_flux(forward: f64, backward: f64) -> Result<f64> {
    if !(forward >= 0.0 && backward >= 0.0) {
        return Err(invalid("transfer rates must be non-negative"));
    }
    Ok(forward - backward)
}

/// Emission rate of the brightest eigenstate of the anharmonic aggregate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnharmonicRate {
    pub rate: RateEnhancement,
    /// Position (ascending energy) of the first eigenvalue of the selected
    /// eigenspace.
    pub eigen_index: usize,
    pub energy: f64,
}

/// Emission from `n` excitations on `N` oscillators with on-site repulsion.
///
/// `H = -sum_{i != j} a_i^dag a_j + (U/2) sum_i n_i (n_i - 1)` in units of
/// the hopping strength. The negative hopping makes the bright mode the
/// ground state of the single-excitation band. Each degenerate eigenspace
/// contributes the largest eigenvalue of `A^dag A` projected onto it, and the
/// maximum over eigenspaces is returned. `U = 0` gives `N n`; `U -> inf`
/// gives the spin value `n (N - n + 1)`.
pub fn anharmonic_sr_rate(n_sites: usize, u_over_v: f64, n_excitations: usize) -> Result<AnharmonicRate> {
    if n_sites == 0 || n_excitations == 0 {
        return Err(invalid("need at least one site and one excitation"));
    }
    if !(u_over_v >= 0.0 && u_over_v.is_finite()) {
        return Err(invalid(format!("U must be finite and non-negative, got {u_over_v}")));
    }
    let sector = enumerate_sector(SectorKind::Ho, n_sites, n_excitations, Some(n_excitations))?;
    let hop = build_hamiltonian(&sector, &HamiltonianSpec::all_to_all(vec![0.0; n_sites], -1.0)?)?;
    let mut h = hop.to_dense_real()?;
    for (i, config) in sector.configs().iter().enumerate() {
        let pairs: f64 = config.iter().map(|&k| (k as f64) * (k as f64 - 1.0)).sum();
        h[(i, i)] += 0.5 * u_over_v * pairs;
    }
    let down = collective_op(&sector, CollectiveOp::ALower)?;
    let up = collective_op(down.codomain(), CollectiveOp::ARaise)?;
    let emission = up.compose(&down)?.to_dense_real()?;

    let (values, vectors) = linalg::sym_eigen(h);
    let scale = values.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let tol = 64.0 * f64::EPSILON * scale * values.len() as f64;
    let mut best: Option<(f64, usize, f64)> = None;
    for cluster in linalg::degenerate_clusters(&values, tol) {
        let e = vectors.columns(cluster.start, cluster.len()).into_owned();
        let projected: DMatrix<f64> = e.transpose() * &emission * &e;
        let projected = (&projected + projected.transpose()) * 0.5;
        let (pv, _) = linalg::sym_eigen(projected);
        let top = *pv.last().unwrap_or(&0.0);
        if best.is_none_or(|(b, _, _)| top > b + 1e-12) {
            best = Some((top, cluster.start, values[cluster.start]));
        }
    }
    let (rate, eigen_index, energy) = best.ok_or_else(|| invalid("empty sector"))?;
    Ok(AnharmonicRate {
        rate: RateEnhancement::new(rate.max(0.0))?,
        eigen_index,
        energy,
    })
}

/// One formula-versus-oracle comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub process: Process,
    pub donor: String,
    pub acceptor: String,
    pub donor_index: usize,
    pub acceptor_index: usize,
    pub closed_form: f64,
    pub oracle: f64,
    pub abs_diff: f64,
}

/// Sizes covered by [`table_rows`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableScope {
    pub max_spin_sites: usize,
    pub max_ho_sites: usize,
    pub max_bright: usize,
    pub max_dark: usize,
}

struct Prepared {
    aggregate: Aggregate,
    index: usize,
    state: StateVector,
    lower: Option<SparseOperator>,
    raise: Option<SparseOperator>,
}

fn prepare(scope: &TableScope) -> Result<Vec<Prepared>> {
    let mut out = Vec::new();
    for n in 1..=scope.max_spin_sites {
        for label in SpinDickeLabel::all(n) {
            for member in spin_multiplet(label)? {
                out.push((Aggregate::Spin(label), member.index, member.state));
            }
        }
    }
    for n in 1..=scope.max_ho_sites {
        for label in HoDickeLabel::all(n, scope.max_bright, scope.max_dark) {
            let state = ho_collective_state(&label, None)?;
            out.push((Aggregate::Ho(label), 0, state));
        }
    }
    out.into_par_iter()
        .map(|(aggregate, index, state)| {
            let lower = if state.sector().n_excitations() > 0 {
                Some(lowering(state.sector())?)
            } else {
                None
            };
            let raise = match &aggregate {
                Aggregate::Spin(l) if l.m == l.n_sites => None,
                _ => Some(raising(state.sector())?),
            };
            Ok(Prepared {
                aggregate,
                index,
                state,
                lower,
                raise,
            })
        })
        .collect()
}

/// Every SR, SA and ST transition within `scope` whose final sector exists,
/// with the closed form next to the golden-rule oracle.
pub fn table_rows(scope: &TableScope) -> Result<Vec<TableRow>> {
    let prepared = prepare(scope)?;
    let vacuum = Aggregate::Field { photons: 0 };
    let photon = Aggregate::Field { photons: 1 };
    let row = |process, donor: &Aggregate, di, acceptor: &Aggregate, ai, oracle: RateEnhancement| {
        let closed = closed_form_enhancement(process, donor, acceptor)?.value();
        Ok(TableRow {
            process,
            donor: donor.to_string(),
            acceptor: acceptor.to_string(),
            donor_index: di,
            acceptor_index: ai,
            closed_form: closed,
            oracle: oracle.value(),
            abs_diff: (closed - oracle.value()).abs(),
        })
    };

    let mut rows: Vec<TableRow> = prepared
        .par_iter()
        .filter_map(|p| {
            let l = p.lower.as_ref()?;
            Some(
                reference_element(p.state.sector().kind())
                    .and_then(|r| golden_rule_enhancement(&p.state, l, r))
                    .and_then(|o| row(Process::SR, &p.aggregate, p.index, &vacuum, 0, o)),
            )
        })
        .collect::<Result<_>>()?;
    let sa: Vec<TableRow> = prepared
        .par_iter()
        .filter_map(|p| {
            let r = p.raise.as_ref()?;
            Some(
                reference_element(p.state.sector().kind())
                    .and_then(|e| golden_rule_enhancement(&p.state, r, e))
                    .and_then(|o| row(Process::SA, &photon, 0, &p.aggregate, p.index, o)),
            )
        })
        .collect::<Result<_>>()?;
    rows.extend(sa);
    let st: Vec<Vec<TableRow>> = prepared
        .par_iter()
        .filter(|d| d.lower.is_some())
        .map(|d| {
            let l = d.lower.as_ref().expect("filtered");
            prepared
                .iter()
                .filter_map(|a| {
                    let r = a.raise.as_ref()?;
                    Some(
                        transfer_oracle_with(l, &d.state, r, &a.state).and_then(|o| {
                            row(Process::ST, &d.aggregate, d.index, &a.aggregate, a.index, o)
                        }),
                    )
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    rows.extend(st.into_iter().flatten());
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dicke::spin_dicke_state;

    fn spin(n: usize, l: usize, m: usize) -> Aggregate {
        Aggregate::Spin(SpinDickeLabel::new(n, l, m).unwrap())
    }

    fn ho(n: usize, r: usize) -> Aggregate {
        Aggregate::Ho(HoDickeLabel::bright(n, r).unwrap())
    }

    const VAC: Aggregate = Aggregate::Field { photons: 0 };
    const PHOTON: Aggregate = Aggregate::Field { photons: 1 };

    #[test]
    fn closed_form_examples() {
        let v = |p, d: &Aggregate, a: &Aggregate| closed_form_enhancement(p, d, a).unwrap().value();
        assert_eq!(v(Process::SR, &spin(4, 4, 2), &VAC), 6.0);
        assert_eq!(v(Process::SR, &spin(4, 4, 1), &VAC), 4.0);
        assert_eq!(v(Process::SR, &spin(4, 3, 1), &VAC), 0.0);
        assert_eq!(v(Process::SA, &PHOTON, &ho(3, 0)), 3.0);
        assert_eq!(v(Process::ST, &spin(2, 2, 1), &spin(2, 2, 1)), 4.0);
        assert_eq!(v(Process::ST, &ho(2, 1), &spin(3, 3, 0)), 2.0 * 3.0);
        assert_eq!(v(Process::ST, &spin(3, 3, 2), &ho(2, 1)), 4.0 * 4.0);
    }

    #[test]
    fn unsupported_combinations() {
        let err = |p, d: &Aggregate, a: &Aggregate| {
            matches!(closed_form_enhancement(p, d, a), Err(Error::UnsupportedCombination(_)))
        };
        assert!(err(Process::SR, &VAC, &spin(2, 2, 1)));
        assert!(err(Process::SR, &spin(2, 2, 1), &spin(2, 2, 1)));
        assert!(err(Process::SR, &spin(2, 2, 1), &PHOTON));
        assert!(err(Process::SA, &VAC, &spin(2, 2, 1)));
        assert!(err(Process::ST, &PHOTON, &spin(2, 2, 1)));
        assert!(err(Process::ST, &spin(2, 2, 1), &VAC));
    }

    #[test]
    fn oracle_examples() {
        let s = spin_dicke_state(SpinDickeLabel::new(4, 4, 1).unwrap(), 0).unwrap();
        assert_eq!(emission_oracle(&s).unwrap().value(), 4.0);
        let h = ho_collective_state(&HoDickeLabel::bright(2, 1).unwrap(), None).unwrap();
        assert!((emission_oracle(&h).unwrap().value() - 2.0).abs() < 1e-12);
        assert_eq!(reference_element(SectorKind::Spin).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(reference_element(SectorKind::Ho).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn dark_states_are_exactly_dark() {
        for n in 2..=6 {
            for label in SpinDickeLabel::all(n).into_iter().filter(|l| l.m + l.l == n && l.m > 0) {
                for member in spin_multiplet(label).unwrap() {
                    let o = emission_oracle(&member.state).unwrap().value();
                    assert!(o < 1e-24, "{label} #{}: {o}", member.index);
                    let c = closed_form_enhancement(Process::SR, &Aggregate::Spin(label), &VAC).unwrap();
                    assert_eq!(c.value(), 0.0);
                }
            }
        }
    }

    #[test]
    fn oracle_rejects_foreign_sector() {
        let s = spin_dicke_state(SpinDickeLabel::new(3, 3, 1).unwrap(), 0).unwrap();
        let other = enumerate_sector(SectorKind::Spin, 3, 2, None).unwrap();
        let op = collective_op(&other, CollectiveOp::JMinus).unwrap();
        assert!(matches!(
            golden_rule_enhancement(&s, &op, Complex64::new(1.0, 0.0)),
            Err(Error::SectorMismatch(_))
        ));
    }

    #[test]
    fn time_reversal_pairs() {
        for n in 1..=6 {
            for label in SpinDickeLabel::all(n).into_iter().filter(|l| l.m < l.l) {
                let up = SpinDickeLabel { m: label.m + 1, ..label };
                let sa = closed_form_enhancement(Process::SA, &PHOTON, &Aggregate::Spin(label)).unwrap();
                let sr = closed_form_enhancement(Process::SR, &Aggregate::Spin(up), &VAC).unwrap();
                assert_eq!(sa, sr);
            }
        }
    }

    #[test]
    fn maxima() {
        for n in (2..=8).step_by(2) {
            let h = (n / 2) as f64;
            assert_eq!(
                max_enhancement(Process::SR, &[(SectorKind::Spin, n)]).unwrap(),
                MaxEnhancement::Finite(h * (h + 1.0))
            );
        }
        assert_eq!(
            max_enhancement(Process::ST, &[(SectorKind::Spin, 2), (SectorKind::Spin, 2)]).unwrap(),
            MaxEnhancement::Finite(4.0)
        );
        assert_eq!(
            max_enhancement(Process::SR, &[(SectorKind::Spin, 3)]).unwrap(),
            MaxEnhancement::Finite(4.0)
        );
        assert_eq!(
            max_enhancement(Process::SR, &[(SectorKind::Ho, 5)]).unwrap(),
            MaxEnhancement::Unbounded
        );
        assert_eq!(
            max_enhancement(Process::ST, &[(SectorKind::Spin, 5), (SectorKind::Ho, 1)]).unwrap(),
            MaxEnhancement::Unbounded
        );
        assert!(max_enhancement(Process::ST, &[(SectorKind::Spin, 5)]).is_err());
    }

    #[test]
    fn flux() {
        assert_eq!(net_flux(6.0, 2.0).unwrap(), 4.0);
        assert_eq!(net_flux(3.0, 0.0).unwrap(), 3.0);
        assert!(net_flux(-1.0, 0.0).is_err());
        // identical donor and acceptor at equal filling
        let a = spin(4, 4, 2);
        let f = closed_form_enhancement(Process::ST, &a, &a).unwrap().value();
        assert_eq!(net_flux(f, f).unwrap(), 0.0);
    }

    #[test]
    fn anharmonic_limits() {
        assert!((anharmonic_sr_rate(4, 0.0, 2).unwrap().rate.value() - 8.0).abs() < 1e-9);
        assert!((anharmonic_sr_rate(4, 1e6, 2).unwrap().rate.value() - 6.0).abs() < 6e-5);
        for u in [0.0, 0.3, 7.0, 1e3] {
            assert!((anharmonic_sr_rate(1, u, 1).unwrap().rate.value() - 1.0).abs() < 1e-12);
        }
        assert!(anharmonic_sr_rate(4, -1.0, 2).is_err());
        assert!(anharmonic_sr_rate(0, 1.0, 2).is_err());
    }

    #[test]
    fn small_table_agrees() {
        let rows = table_rows(&TableScope {
            max_spin_sites: 3,
            max_ho_sites: 2,
            max_bright: 2,
            max_dark: 1,
        })
        .unwrap();
        assert!(rows.iter().any(|r| r.process == Process::SA));
        assert!(rows.iter().all(|r| r.abs_diff < 1e-9), "{:?}", rows.iter().find(|r| r.abs_diff >= 1e-9));
    }
}
