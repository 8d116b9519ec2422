//! Brute-force oracles for the geometry, lattice and field code.

use sibm_core::geometry::{Corner, Measure, Rect, UnionSet};
use sibm_core::lattice::{consistent_numbering, intersection_closure, left_neighborhoods};
use sibm_core::processes::{evaluate_increment, sample_field, FieldValue, ProcessModel};
use sibm_core::rng::{CounterRng, Domain};
use sibm_core::verify::random_lattice;

const RES: usize = 2048;

// Corners on the lines of a RES×RES grid over [0, 1]², so counting grid
// cells is an exact oracle.
fn grid_corners(rng: &mut CounterRng, k: usize) -> Vec<Corner> {
    (0..k)
        .map(|_| {
            let x = (rng.next_u64() % (RES as u64 + 1)) as f64 / RES as f64;
            let y = (rng.next_u64() % (RES as u64 + 1)) as f64 / RES as f64;
            Corner::new(vec![x, y]).unwrap()
        })
        .collect()
}

// Column heights of the union in grid cells: cell (i, j) is covered when
// its upper corner is dominated by some corner.
fn covered_cells(u: &UnionSet) -> Vec<usize> {
    let mut heights = vec![0usize; RES];
    for c in u.corners() {
        let px = (c.coords()[0] * RES as f64).round() as usize;
        let py = (c.coords()[1] * RES as f64).round() as usize;
        for h in heights.iter_mut().take(px) {
            *h = (*h).max(py);
        }
    }
    heights
}

fn cell_count(u: &UnionSet) -> f64 {
    covered_cells(u).iter().sum::<usize>() as f64 / (RES * RES) as f64
}

#[test]
fn union_measure_matches_grid_count() {
    let leb = Measure::lebesgue(2);
    let mut rng = CounterRng::keyed(1, Domain::Reference, 0, 0);
    for _ in 0..40 {
        let u = UnionSet::canonicalize(2, grid_corners(&mut rng, 5)).unwrap();
        assert!((leb.union_measure(&u).unwrap() - cell_count(&u)).abs() < 1e-6);
    }
}

// Brute force over every cell, without the column shortcut.
#[test]
fn union_measure_matches_cell_membership() {
    let leb = Measure::lebesgue(2);
    let mut rng = CounterRng::keyed(2, Domain::Reference, 0, 0);
    for _ in 0..4 {
        let u = UnionSet::canonicalize(2, grid_corners(&mut rng, 5)).unwrap();
        let mut count = 0usize;
        for i in 0..RES {
            for j in 0..RES {
                let top = Corner::new(vec![(i + 1) as f64 / RES as f64, (j + 1) as f64 / RES as f64]).unwrap();
                if u.contains_rect(&Rect::new(top)).unwrap() {
                    count += 1;
                }
            }
        }
        let area = count as f64 / (RES * RES) as f64;
        assert!((leb.union_measure(&u).unwrap() - area).abs() < 1e-6);
    }
}

#[test]
fn increment_measure_matches_grid_count() {
    let leb = Measure::lebesgue(2);
    let mut rng = CounterRng::keyed(3, Domain::Reference, 0, 0);
    for _ in 0..40 {
        let u = UnionSet::canonicalize(2, grid_corners(&mut rng, 4)).unwrap();
        let a = Rect::new(grid_corners(&mut rng, 1).remove(0));
        let with_a = u.with_rect(&a).unwrap();
        let expect = cell_count(&with_a) - cell_count(&u);
        assert!((leb.increment_measure(&a, &u).unwrap() - expect).abs() < 1e-6);
    }
}

#[test]
fn hand_examples() {
    let leb = Measure::lebesgue(2);
    let u = UnionSet::canonicalize(2, vec![Corner::new(vec![1.0, 3.0]).unwrap()]).unwrap();
    let a = Rect::from_coords(vec![2.0, 2.0]).unwrap();
    assert_eq!(leb.increment_measure(&a, &u).unwrap(), 2.0);
    let stair =
        UnionSet::canonicalize(2, vec![Corner::new(vec![1.0, 2.0]).unwrap(), Corner::new(vec![2.0, 1.0]).unwrap()])
            .unwrap();
    assert_eq!(leb.union_measure(&stair).unwrap(), 3.0);
}

fn subset_min_oracle(rects: &[Rect]) -> Vec<Vec<f64>> {
    let k = rects.len();
    let mut out: Vec<Vec<f64>> = Vec::new();
    for mask in 1u32..(1 << k) {
        let mut m = vec![f64::INFINITY; 2];
        for (i, r) in rects.iter().enumerate() {
            if mask & (1 << i) != 0 {
                for (a, b) in m.iter_mut().zip(r.corner().coords()) {
                    *a = a.min(*b);
                }
            }
        }
        if !out.contains(&m) {
            out.push(m);
        }
    }
    out.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    out
}

#[test]
fn closure_matches_subset_oracle() {
    let mut rng = CounterRng::keyed(4, Domain::Reference, 0, 0);
    for k in 1..=6 {
        for _ in 0..50 {
            // Coarse coordinates force coincidences and ties.
            let rects: Vec<Rect> = (0..k)
                .map(|_| Rect::from_coords(vec![(rng.next_u64() % 6) as f64, (rng.next_u64() % 6) as f64]).unwrap())
                .collect();
            let lat = intersection_closure(&rects).unwrap();
            let got: Vec<Vec<f64>> = lat.sets().iter().map(|r| r.corner().coords().to_vec()).collect();
            assert_eq!(got, subset_min_oracle(&rects));
        }
    }
}

#[test]
fn cell_measures_telescope_on_random_lattices() {
    let leb = Measure::lebesgue(2);
    for i in 0..200 {
        let lat = random_lattice(5, i, 12, 10.0).unwrap();
        let num = consistent_numbering(&lat, &leb).unwrap();
        assert!(num.is_consistent(&lat));
        let cells = left_neighborhoods(&lat, &num, &leb).unwrap();
        let all = UnionSet::canonicalize(2, lat.sets().iter().map(|r| r.corner().clone()).collect()).unwrap();
        assert!((cells.measure_sum() - leb.union_measure(&all).unwrap()).abs() < 1e-9);
        assert!(cells.cells.iter().skip(1).all(|c| c.measure > 0.0));
    }
}

#[test]
fn increment_matches_cell_membership_sum() {
    let n = 128;
    let leb = Measure::lebesgue(2);
    let field = sample_field(&ProcessModel::Sibm, n, 1.0, &leb, 21).unwrap();
    let mut rng = CounterRng::keyed(6, Domain::Reference, 0, 0);
    let mut rect = || Rect::from_coords(vec![rng.uniform(), rng.uniform()]).unwrap();
    for _ in 0..100 {
        let a = rect();
        let ex: Vec<Rect> = (0..5).map(|_| rect()).collect();
        let snap = |r: &Rect| field.grid().snap_corner(r.corner()).unwrap();
        let (ax, ay) = snap(&a);
        let exs: Vec<(usize, usize)> = ex.iter().map(snap).collect();
        let mut direct = FieldValue::ZERO;
        for iy in 0..ay {
            for ix in 0..ax {
                if !exs.iter().any(|&(px, py)| ix < px && iy < py) {
                    direct = direct + field.cell(ix, iy);
                }
            }
        }
        assert_eq!(evaluate_increment(&field, &a, &ex).unwrap(), direct);
    }
}
