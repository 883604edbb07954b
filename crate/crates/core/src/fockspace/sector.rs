use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Site-occupation tuple, one entry per site.
pub type Config = Vec<u8>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SectorKind {
    Spin,
    Ho,
}

impl fmt::Display for SectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SectorKind::Spin => f.write_str("spin"),
            SectorKind::Ho => f.write_str("ho"),
        }
    }
}

/// All configurations of `n_sites` sites holding exactly `n_excitations`
/// excitations, in descending lexicographic order.
///
/// Configurations are packed into a base-`(cutoff + 1)` integer for the
/// index lookup.
#[derive(Clone)]
pub struct BasisSector {
    kind: SectorKind,
    n_sites: usize,
    n_excitations: usize,
    per_site_cutoff: usize,
    configs: Vec<Config>,
    index: HashMap<u64, usize>,
}

impl fmt::Debug for BasisSector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BasisSector")
            .field("kind", &self.kind)
            .field("n_sites", &self.n_sites)
            .field("n_excitations", &self.n_excitations)
            .field("per_site_cutoff", &self.per_site_cutoff)
            .field("dim", &self.configs.len())
            .finish()
    }
}

impl PartialEq for BasisSector {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.n_sites == other.n_sites
            && self.n_excitations == other.n_excitations
            && self.effective_cutoff() == other.effective_cutoff()
    }
}

impl Eq for BasisSector {}

/// Enumerate a fixed-excitation sector.
///
/// `per_site_cutoff` is ignored for spins (always 1) and defaults to
/// `n_excitations` for oscillators, which makes the truncation exact for
/// excitation-conserving dynamics.
pub fn enumerate_sector(
    kind: SectorKind,
    n_sites: usize,
    n_excitations: usize,
    per_site_cutoff: Option<usize>,
) -> Result<Arc<BasisSector>> {
    BasisSector::new(kind, n_sites, n_excitations, per_site_cutoff).map(Arc::new)
}

impl BasisSector {
    pub fn new(
        kind: SectorKind,
        n_sites: usize,
        n_excitations: usize,
        per_site_cutoff: Option<usize>,
    ) -> Result<Self> {
        if n_sites == 0 {
            return Err(invalid("n_sites must be at least 1"));
        }
        let cutoff = match kind {
            SectorKind::Spin => {
                if n_excitations > n_sites {
                    return Err(invalid(format!(
                        "spin sector cannot hold {n_excitations} excitations on {n_sites} sites"
                    )));
                }
                1
            }
            SectorKind::Ho => {
                let c = per_site_cutoff.unwrap_or(n_excitations.max(1));
                if c == 0 {
                    return Err(invalid("per_site_cutoff must be positive"));
                }
                if n_excitations > n_sites * c {
                    return Err(invalid(format!(
                        "oscillator sector with cutoff {c} cannot hold {n_excitations} excitations on {n_sites} sites"
                    )));
                }
                c
            }
        };
        if cutoff > u8::MAX as usize {
            return Err(invalid("per_site_cutoff exceeds 255"));
        }
        let base = (cutoff + 1) as f64;
        if base.powi(n_sites as i32) >= 2f64.powi(63) {
            return Err(invalid(format!(
                "sector with {n_sites} sites and cutoff {cutoff} is too large to index"
            )));
        }

        let mut configs = Vec::new();
        let mut current = vec![0u8; n_sites];
        fill(&mut current, 0, n_excitations, cutoff, &mut configs);

        let mut sector = BasisSector {
            kind,
            n_sites,
            n_excitations,
            per_site_cutoff: cutoff,
            configs,
            index: HashMap::new(),
        };
        sector.index = sector
            .configs
            .iter()
            .enumerate()
            .map(|(i, c)| (sector.key(c), i))
            .collect();
        Ok(sector)
    }

    pub fn kind(&self) -> SectorKind {
        self.kind
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_excitations(&self) -> usize {
        self.n_excitations
    }

    pub fn per_site_cutoff(&self) -> usize {
        self.per_site_cutoff
    }

    /// Cutoff that actually constrains configurations (`min(cutoff, n)`).
    pub fn effective_cutoff(&self) -> usize {
        self.per_site_cutoff.min(self.n_excitations)
    }

    /// Whether the per-site cutoff removes any configuration.
    pub fn is_truncated(&self) -> bool {
        self.per_site_cutoff < self.n_excitations
    }

    pub fn dim(&self) -> usize {
        self.configs.len()
    }

    pub fn configs(&self) -> &[Config] {
        &self.configs
    }

    pub fn config(&self, i: usize) -> &[u8] {
        &self.configs[i]
    }

    pub fn index_of(&self, config: &[u8]) -> Option<usize> {
        if config.len() != self.n_sites
            || config.iter().any(|&n| n as usize > self.per_site_cutoff)
        {
            return None;
        }
        self.index.get(&self.key(config)).copied()
    }

    fn key(&self, config: &[u8]) -> u64 {
        let base = (self.per_site_cutoff + 1) as u64;
        config
            .iter()
            .rev()
            .fold(0u64, |acc, &n| acc * base + n as u64)
    }
}

fn fill(current: &mut [u8], site: usize, remaining: usize, cutoff: usize, out: &mut Vec<Config>) {
    let n_sites = current.len();
    if site == n_sites - 1 {
        if remaining <= cutoff {
            current[site] = remaining as u8;
            out.push(current.to_vec());
        }
        return;
    }
    let rest_capacity = (n_sites - site - 1) * cutoff;
    for v in (0..=cutoff.min(remaining)).rev() {
        if remaining - v > rest_capacity {
            break;
        }
        current[site] = v as u8;
        fill(current, site + 1, remaining - v, cutoff, out);
    }
    current[site] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binomial(n: usize, k: usize) -> usize {
        if k > n {
            return 0;
        }
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn spin_four_two_has_six_configs() {
        let s = enumerate_sector(SectorKind::Spin, 4, 2, None).unwrap();
        assert_eq!(s.dim(), 6);
        assert_eq!(s.config(0), &[1, 1, 0, 0]);
        assert_eq!(s.config(5), &[0, 0, 1, 1]);
    }

    #[test]
    fn ho_two_sites_two_quanta() {
        let s = enumerate_sector(SectorKind::Ho, 2, 2, Some(2)).unwrap();
        let expected: Vec<Config> = vec![vec![2, 0], vec![1, 1], vec![0, 2]];
        assert_eq!(s.configs(), expected.as_slice());
    }

    #[test]
    fn single_spin_vacuum() {
        let s = enumerate_sector(SectorKind::Spin, 1, 0, None).unwrap();
        assert_eq!(s.dim(), 1);
        assert_eq!(s.config(0), &[0]);
    }

    #[test]
    fn binomial_sizes() {
        for n in 1..=8 {
            for m in 0..=n {
                let s = BasisSector::new(SectorKind::Spin, n, m, None).unwrap();
                assert_eq!(s.dim(), binomial(n, m), "spin N={n} m={m}");
                let h = BasisSector::new(SectorKind::Ho, n, m, None).unwrap();
                assert_eq!(h.dim(), binomial(n + m - 1, m), "ho N={n} n={m}");
            }
        }
    }

    #[test]
    fn ordering_and_lookup() {
        let s = BasisSector::new(SectorKind::Ho, 4, 3, Some(2)).unwrap();
        for w in s.configs().windows(2) {
            assert!(w[0] > w[1], "not strictly descending: {:?} {:?}", w[0], w[1]);
        }
        for (i, c) in s.configs().iter().enumerate() {
            assert_eq!(c.iter().map(|&x| x as usize).sum::<usize>(), 3);
            assert!(c.iter().all(|&x| x <= 2));
            assert_eq!(s.index_of(c), Some(i));
        }
        assert_eq!(s.index_of(&[3, 0, 0, 0]), None);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(BasisSector::new(SectorKind::Spin, 0, 0, None).is_err());
        assert!(BasisSector::new(SectorKind::Spin, 3, 4, None).is_err());
        assert!(BasisSector::new(SectorKind::Ho, 2, 5, Some(2)).is_err());
        assert!(BasisSector::new(SectorKind::Ho, 2, 1, Some(0)).is_err());
    }

    #[test]
    fn untruncated_cutoffs_compare_equal() {
        let a = BasisSector::new(SectorKind::Ho, 3, 2, Some(2)).unwrap();
        let b = BasisSector::new(SectorKind::Ho, 3, 2, Some(5)).unwrap();
        let c = BasisSector::new(SectorKind::Ho, 3, 2, Some(1)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.configs(), b.configs());
    }
}
