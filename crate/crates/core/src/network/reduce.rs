//! Interconnect reduction of aggregated scattering matrices.
//!
//! Terminals tied in pairs satisfy `a_p = b_q` and `a_q = b_p`. Writing that
//! as `a_i = F b_i` with `F` the pair-swap operator, the external waves obey
//! `b_E = [S_EE + S_Ei (F - S_ii)^-1 S_iE] a_E`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::floquet::{FloquetMatrix, HarmonicGrid, MatrixKind};
use crate::linalg::{CMatrix, Factorized, CONDITION_LIMIT};

/// Block-diagonal aggregation of scattering matrices. Terminal `k` of block
/// `b` becomes port `offset(b) + k`.
pub fn aggregate_fsm(blocks: &[FloquetMatrix]) -> Result<FloquetMatrix> {
    let first = blocks
        .first()
        .ok_or_else(|| Error::DimensionMismatch("nothing to aggregate".into()))?;
    let grid = *first.grid();
    for b in blocks {
        b.require(MatrixKind::Scattering)?;
        if !b.grid().same_as(&grid) {
            return Err(Error::GridMismatch);
        }
    }
    if blocks.len() == 1 {
        return Ok(first.clone());
    }
    let ports: usize = blocks.iter().map(FloquetMatrix::ports).sum();
    let dim = ports * grid.len();
    let mut data = CMatrix::zeros(dim, dim);
    let mut offset = 0;
    for b in blocks {
        data.view_mut((offset, offset), (b.dim(), b.dim()))
            .copy_from(b.data());
        offset += b.dim();
    }
    Ok(FloquetMatrix::from_parts(
        grid,
        ports,
        MatrixKind::Scattering,
        data,
    ))
}

/// Ideal parallel junction of `k` ports: `S = (2/k) J - I` at every harmonic.
pub fn junction_fsm(k: usize, grid: &HarmonicGrid) -> Result<FloquetMatrix> {
    if k < 2 {
        return Err(Error::param(
            "k",
            format!("a junction needs at least 2 legs, got {k}"),
        ));
    }
    let on = 2.0 / k as f64;
    Ok(FloquetMatrix::harmonic_diagonal(
        *grid,
        k,
        MatrixKind::Scattering,
        |i, j, _| Complex64::new(if i == j { on - 1.0 } else { on }, 0.0),
    ))
}

/// One-port short circuit, `S = -I`.
pub fn short_fsm(grid: &HarmonicGrid) -> FloquetMatrix {
    FloquetMatrix::harmonic_diagonal(*grid, 1, MatrixKind::Scattering, |_, _, _| {
        Complex64::new(-1.0, 0.0)
    })
}

/// One-port open circuit, `S = I`.
pub fn open_fsm(grid: &HarmonicGrid) -> FloquetMatrix {
    FloquetMatrix::identity(*grid, 1, MatrixKind::Scattering)
}

/// Which terminals of an aggregate are tied together and which stay external.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectionMap {
    terminals: usize,
    pairs: Vec<(usize, usize)>,
    external: Vec<usize>,
}

impl ConnectionMap {
    /// Every terminal in `0..terminals` must appear exactly once, either in a
    /// pair or in `external`. The reduced matrix lists external terminals in
    /// the order given.
    pub fn new(terminals: usize, pairs: Vec<(usize, usize)>, external: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; terminals];
        let mut mark = |t: usize| -> Result<()> {
            match seen.get_mut(t) {
                None => Err(Error::InvalidMatching(format!(
                    "terminal {t} out of range for {terminals} terminals"
                ))),
                Some(true) => Err(Error::InvalidMatching(format!("terminal {t} used twice"))),
                Some(s) => {
                    *s = true;
                    Ok(())
                }
            }
        };
        for &(p, q) in &pairs {
            if p == q {
                return Err(Error::InvalidMatching(format!(
                    "terminal {p} tied to itself"
                )));
            }
            mark(p)?;
            mark(q)?;
        }
        for &e in &external {
            mark(e)?;
        }
        if let Some(t) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidMatching(format!(
                "terminal {t} is neither tied nor external"
            )));
        }
        Ok(Self {
            terminals,
            pairs,
            external,
        })
    }

    pub fn terminals(&self) -> usize {
        self.terminals
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn external(&self) -> &[usize] {
        &self.external
    }

    /// Inner terminals in pair order `p1, q1, p2, q2, ...`.
    pub fn inner(&self) -> Vec<usize> {
        self.pairs.iter().flat_map(|&(p, q)| [p, q]).collect()
    }
}

/// The pair-swap operator `F` over the inner terminals, in
/// [`ConnectionMap::inner`] order.
pub fn connection_operator(map: &ConnectionMap, grid: &HarmonicGrid) -> FloquetMatrix {
    let h = grid.len();
    let inner = 2 * map.pairs.len();
    let mut data = CMatrix::zeros(inner * h, inner * h);
    let one = Complex64::new(1.0, 0.0);
    for pair in 0..map.pairs.len() {
        let (p, q) = (2 * pair, 2 * pair + 1);
        for k in 0..h {
            data[(p * h + k, q * h + k)] = one;
            data[(q * h + k, p * h + k)] = one;
        }
    }
    FloquetMatrix::from_parts(*grid, inner, MatrixKind::Scattering, data)
}

/// Scattering matrix seen at the external terminals once the tied pairs are
/// connected.
pub fn reduce_to_external(aggregate: &FloquetMatrix, map: &ConnectionMap) -> Result<FloquetMatrix> {
    aggregate.require(MatrixKind::Scattering)?;
    if aggregate.ports() != map.terminals {
        return Err(Error::InvalidMatching(format!(
            "map covers {} terminals, matrix has {} ports",
            map.terminals,
            aggregate.ports()
        )));
    }
    let grid = *aggregate.grid();
    let h = grid.len();
    let rows = |terms: &[usize]| -> Vec<usize> {
        terms.iter().flat_map(|&t| (t * h)..(t * h + h)).collect()
    };
    let ext = rows(&map.external);
    let inn = rows(&map.inner());
    let s = aggregate.data();
    let pick =
        |r: &[usize], c: &[usize]| CMatrix::from_fn(r.len(), c.len(), |i, j| s[(r[i], c[j])]);

    let s_ee = pick(&ext, &ext);
    if inn.is_empty() {
        return Ok(FloquetMatrix::from_parts(
            grid,
            map.external.len(),
            MatrixKind::Scattering,
            s_ee,
        ));
    }
    let f = connection_operator(map, &grid).into_data();
    let lu = Factorized::new(f - pick(&inn, &inn));
    let condition = lu.condition_estimate();
    if !(condition <= CONDITION_LIMIT) {
        return Err(Error::IllConditionedInterconnect { condition });
    }
    if ext.is_empty() {
        return Ok(FloquetMatrix::from_parts(
            grid,
            0,
            MatrixKind::Scattering,
            CMatrix::zeros(0, 0),
        ));
    }
    let x = lu
        .solve(&pick(&inn, &ext))
        .ok_or(Error::IllConditionedInterconnect { condition })?;
    let reduced = s_ee + pick(&ext, &inn) * x;
    Ok(FloquetMatrix::from_parts(
        grid,
        map.external.len(),
        MatrixKind::Scattering,
        reduced,
    ))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::floquet::admittance_to_scattering;

    fn grid() -> HarmonicGrid {
        HarmonicGrid::new(915e6, 106e6, 2).unwrap()
    }

    fn through(g: &HarmonicGrid) -> FloquetMatrix {
        junction_fsm(2, g).unwrap()
    }

    #[test]
    fn junction_entries() {
        let g = grid();
        let j2 = through(&g).fundamental();
        assert_eq!(j2[(0, 0)].norm(), 0.0);
        assert_eq!(j2[(0, 1)].re, 1.0);
        let j3 = junction_fsm(3, &g).unwrap().fundamental();
        assert!((j3[(1, 1)].re + 1.0 / 3.0).abs() < 1e-15);
        assert!((j3[(0, 2)].re - 2.0 / 3.0).abs() < 1e-15);
        assert!(junction_fsm(1, &g).is_err());
    }

    #[test]
    fn junctions_are_unitary_and_symmetric() {
        let g = grid();
        for k in 2..7 {
            let j = junction_fsm(k, &g).unwrap();
            let d = j.data();
            assert!(crate::linalg::max_abs_diff(d, &d.transpose()) < 1e-15);
            let gram = d.adjoint() * d;
            assert!(
                crate::linalg::max_abs_diff(&gram, &CMatrix::identity(d.nrows(), d.nrows()))
                    < 1e-14
            );
        }
    }

    #[test]
    fn aggregate_is_block_diagonal() {
        let g = grid();
        let a = short_fsm(&g);
        let b = open_fsm(&g);
        let agg = aggregate_fsm(&[a.clone(), b]).unwrap();
        assert_eq!(agg.ports(), 2);
        let f = agg.fundamental();
        assert_eq!(f[(0, 0)].re, -1.0);
        assert_eq!(f[(1, 1)].re, 1.0);
        assert_eq!(f[(0, 1)].norm(), 0.0);
        assert_eq!(aggregate_fsm(&[a.clone()]).unwrap(), a);
        let other = HarmonicGrid::new(900e6, 106e6, 2).unwrap();
        assert_eq!(
            aggregate_fsm(&[a, short_fsm(&other)]),
            Err(Error::GridMismatch)
        );
    }

    #[test]
    fn connection_operator_is_involutive() {
        let g = grid();
        let map = ConnectionMap::new(6, vec![(2, 3), (0, 5)], vec![1, 4]).unwrap();
        let f = connection_operator(&map, &g);
        let d = f.data();
        let sq = d * d;
        assert!(crate::linalg::max_abs_diff(&sq, &CMatrix::identity(d.nrows(), d.nrows())) == 0.0);
        assert_eq!(f.fundamental()[(0, 1)].re, 1.0);
        assert_eq!(f.fundamental()[(0, 0)].re, 0.0);
        let empty = ConnectionMap::new(1, vec![], vec![0]).unwrap();
        assert_eq!(connection_operator(&empty, &g).dim(), 0);
    }

    #[test]
    fn invalid_maps_are_rejected() {
        assert!(ConnectionMap::new(3, vec![(0, 0)], vec![1, 2]).is_err());
        assert!(ConnectionMap::new(3, vec![(0, 1)], vec![1, 2]).is_err());
        assert!(ConnectionMap::new(3, vec![(0, 1)], vec![]).is_err());
        assert!(ConnectionMap::new(3, vec![(0, 3)], vec![1, 2]).is_err());
    }

    #[test]
    fn cascaded_throughs_are_a_through() {
        let g = grid();
        let agg = aggregate_fsm(&[through(&g), through(&g)]).unwrap();
        let map = ConnectionMap::new(4, vec![(1, 2)], vec![0, 3]).unwrap();
        let s = reduce_to_external(&agg, &map).unwrap();
        assert!(s.max_abs_diff(&through(&g)).unwrap() < 1e-15);
    }

    #[test]
    fn matched_load_behind_a_through() {
        let g = grid();
        let load = FloquetMatrix::zeros(g, 1, MatrixKind::Scattering);
        let agg = aggregate_fsm(&[through(&g), load]).unwrap();
        let map = ConnectionMap::new(3, vec![(1, 2)], vec![0]).unwrap();
        let s = reduce_to_external(&agg, &map).unwrap();
        assert!(s.data().iter().all(|v| v.norm() < 1e-15));
    }

    #[test]
    fn shunt_capacitor_between_two_ports() {
        let g = grid();
        let (c, z0) = (450e-15, 50.0);
        let y = FloquetMatrix::harmonic_diagonal(g, 1, MatrixKind::Admittance, |_, _, n| {
            Complex64::new(0.0, 2.0 * PI * g.frequency(n) * c)
        });
        let cap = admittance_to_scattering(&y, z0).unwrap();
        let agg = aggregate_fsm(&[junction_fsm(3, &g).unwrap(), cap]).unwrap();
        let map = ConnectionMap::new(4, vec![(2, 3)], vec![0, 1]).unwrap();
        let s = reduce_to_external(&agg, &map).unwrap();
        for n in g.harmonics() {
            let jwcz = Complex64::new(0.0, 2.0 * PI * g.frequency(n) * c * z0);
            let s21 = Complex64::new(2.0, 0.0) / (Complex64::new(2.0, 0.0) + jwcz);
            let s11 = -jwcz / (Complex64::new(2.0, 0.0) + jwcz);
            assert!((s.entry(1, n, 0, n) - s21).norm() < 1e-10);
            assert!((s.entry(0, n, 0, n) - s11).norm() < 1e-10);
        }
    }

    #[test]
    fn shorted_loop_is_ill_conditioned() {
        // a through closed on itself has no unique solution
        let g = grid();
        let map = ConnectionMap::new(2, vec![(0, 1)], vec![]).unwrap();
        assert!(matches!(
            reduce_to_external(&through(&g), &map),
            Err(Error::IllConditionedInterconnect { .. })
        ));
    }
}
