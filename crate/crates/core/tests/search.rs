use meanzero_core::extremal::Extremal;
use meanzero_core::functional::theorem1_bound;
use meanzero_core::search::{convergence_study, enumerate_vertices, extremal_pattern, search_max, Strategy};
use meanzero_core::{Bounds, MonotoneWeight};

/// `int_0^1 J^2` for the uniform-grid step function with the given cell
/// values; Simpson's rule is exact on each quadratic piece.
fn squared_oracle(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mut y0 = 0.0;
    let mut total = 0.0;
    for v in values {
        let y1 = y0 + v / n;
        let ym = 0.5 * (y0 + y1);
        total += (y0 * y0 + 4.0 * ym * ym + y1 * y1) / (6.0 * n);
        y0 = y1;
    }
    total
}

/// Literal enumeration of all `n 2^(n-1)` (fractional cell, high subset)
/// candidates plus all binary vectors, without the count pruning.
fn brute_force_max(b: &Bounds, n: usize) -> f64 {
    let (m, big) = (b.lower(), b.upper());
    let mut best = f64::NEG_INFINITY;
    for frac in 0..n {
        for mask in 0u32..(1 << (n - 1)) {
            let mut values = Vec::with_capacity(n);
            let mut bit = 0;
            for i in 0..n {
                if i == frac {
                    values.push(f64::NAN);
                } else {
                    values.push(if mask >> bit & 1 == 1 { big } else { m });
                    bit += 1;
                }
            }
            let r: f64 = -values.iter().filter(|v| !v.is_nan()).sum::<f64>();
            if r < m - 1e-12 || r > big + 1e-12 {
                continue;
            }
            values[frac] = r.clamp(m, big);
            best = best.max(squared_oracle(&values));
        }
    }
    best
}

fn b(m: f64, big: f64) -> Bounds {
    Bounds::new(m, big).unwrap()
}

fn square(b: &Bounds) -> MonotoneWeight {
    MonotoneWeight::power(2.0, b.peak()).unwrap()
}

#[test]
fn vertex_enumeration_matches_brute_force() {
    for bb in [b(-1.0, 1.0), b(-1.0, 2.0), b(-2.0, 3.0), b(-0.3, 1.7)] {
        for n in 2..=10 {
            let got = search_max(&bb, &square(&bb), n, Strategy::VertexEnum).unwrap();
            let want = brute_force_max(&bb, n);
            assert!(
                (got.value - want).abs() <= 1e-14,
                "{bb:?} n {n}: {} vs {want}",
                got.value
            );
        }
    }
}

#[test]
fn vertices_are_feasible_and_distinct() {
    for bb in [b(-1.0, 1.0), b(-1.0, 2.0), b(-0.1, 5.0)] {
        for n in 2..=9 {
            let vs: Vec<Vec<f64>> = enumerate_vertices(&bb, n).unwrap().map(|v| v.values(&bb)).collect();
            for v in &vs {
                let s: f64 = v.iter().sum();
                assert!(s.abs() <= 1e-12 * bb.span() * n as f64, "{v:?}");
                assert!(v.iter().all(|x| bb.contains(*x)));
                let interior = v.iter().filter(|&&x| x != bb.lower() && x != bb.upper()).count();
                assert!(interior <= 1);
            }
            let mut keys: Vec<Vec<u64>> = vs.iter().map(|v| v.iter().map(|x| x.to_bits()).collect()).collect();
            keys.sort();
            let before = keys.len();
            keys.dedup();
            assert_eq!(before, keys.len(), "{bb:?} n {n}");
        }
    }
}

#[test]
fn symmetric_twelve_cells() {
    let bb = b(-1.0, 1.0);
    let r = search_max(&bb, &square(&bb), 12, Strategy::VertexEnum).unwrap();
    assert!(r.value <= 1.0 / 12.0 + 1e-12);
    assert!(r.gap <= 0.02 / 12.0);
    assert!(r.gap.abs() <= 1e-10);
    assert!(extremal_pattern(r.best.values(), &bb).is_some());
}

#[test]
fn two_cells_contain_the_extremizer() {
    let bb = b(-1.0, 1.0);
    let r = search_max(&bb, &square(&bb), 2, Strategy::VertexEnum).unwrap();
    // Ties between the mirror images go to the lexicographically smaller vector.
    assert_eq!(r.best.values(), &[-1.0, 1.0]);
    assert!((r.value - 1.0 / 12.0).abs() <= 1e-16);
}

#[test]
fn off_grid_crossover_leaves_positive_gap() {
    let bb = b(-1.0, 2.0);
    let r = search_max(&bb, &square(&bb), 16, Strategy::VertexEnum).unwrap();
    let bound = 4.0 / 27.0;
    assert!((r.bound - bound).abs() < 1e-16);
    assert!(r.gap > 0.0 && r.gap <= 0.05 * bound);
}

#[test]
fn on_grid_crossovers_attain_bound() {
    for (bb, counts) in [(b(-1.0, 1.0), vec![2, 4, 8]), (b(-1.0, 2.0), vec![3, 6, 12])] {
        let study = convergence_study(&bb, &square(&bb), &counts, Strategy::VertexEnum).unwrap();
        assert!(study.nested && study.monotone);
        for row in &study.rows {
            assert!(row.gap.abs() <= 1e-10, "{row:?}");
            assert!(row.pattern.is_some());
        }
    }
}

#[test]
fn off_grid_gaps_shrink() {
    let bb = b(-1.0, 2.0);
    let study = convergence_study(&bb, &square(&bb), &[4, 8, 16], Strategy::VertexEnum).unwrap();
    assert!(study.nested && study.monotone);
    let gaps: Vec<f64> = study.rows.iter().map(|r| r.gap).collect();
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2] && gaps[2] > 0.0, "{gaps:?}");
    // Hand computation for n = 4: cells (-1, -1, 0, 2) give J^2 integral 1/8.
    assert!((study.rows[0].value - 0.125).abs() < 1e-15);
}

#[test]
fn on_grid_patterns_match_extremizers_exactly() {
    for (m, big, n) in [(-1.0, 2.0, 3), (-1.0, 2.0, 12), (-1.0, 1.0, 8), (-1.0, 3.0, 8)] {
        let bb = b(m, big);
        for p in [1.0, 2.0, 3.0] {
            let w = MonotoneWeight::power(p, bb.peak()).unwrap();
            let r = search_max(&bb, &w, n, Strategy::VertexEnum).unwrap();
            assert!(r.gap.abs() <= 1e-10, "({m},{big}) n {n} p {p}: {r:?}");
            // Ties resolve to the lexicographically smaller vector: f1 = (m.., M..).
            let high = (bb.crossover0() * n as f64).round() as usize;
            let mut expected = vec![m; n - high];
            expected.extend(std::iter::repeat_n(big, high));
            assert_eq!(r.best.values(), expected.as_slice());
            assert_eq!(extremal_pattern(r.best.values(), &bb), Some(Extremal::F1));
        }
    }
}

#[test]
fn search_never_beats_bound() {
    for (m, big) in [(-1.0, 1.0), (-1.0, 2.0), (-2.0, 3.0), (-0.1, 5.0), (-4.0, 0.5)] {
        let bb = b(m, big);
        for p in [1.0, 1.5, 2.0, 4.0] {
            let w = MonotoneWeight::power(p, bb.peak()).unwrap();
            for n in [5, 9, 13] {
                let r = search_max(&bb, &w, n, Strategy::VertexEnum).unwrap();
                assert!(r.gap >= -1e-9);
                assert!(r.value <= theorem1_bound(&bb, &w).unwrap() + 1e-9);
            }
        }
    }
}

#[test]
fn local_search_matches_vertex_optimum() {
    for bb in [b(-1.0, 1.0), b(-1.0, 2.0), b(-2.0, 3.0)] {
        for n in [4, 7, 10, 12] {
            let exact = search_max(&bb, &square(&bb), n, Strategy::VertexEnum).unwrap();
            let local = search_max(&bb, &square(&bb), n, Strategy::LocalSearch { restarts: 50, seed: 11 }).unwrap();
            assert!(!local.certifying);
            assert!(
                local.value >= exact.value - 1e-9,
                "{bb:?} n {n}: {} < {}",
                local.value,
                exact.value
            );
            assert!(local.best.is_admissible(&bb));
        }
    }
}

#[test]
fn local_search_handles_non_convex_weights() {
    let bb = b(-1.0, 2.0);
    for w in [
        MonotoneWeight::power(0.5, bb.peak()).unwrap(),
        MonotoneWeight::shifted_log(0.01, bb.peak()).unwrap(),
    ] {
        let r = search_max(&bb, &w, 12, Strategy::LocalSearch { restarts: 20, seed: 3 }).unwrap();
        assert!(r.gap >= -1e-9, "{w}: {r:?}");
        assert!(r.gap <= 0.1 * r.bound.abs(), "{w}: {r:?}");
    }
}

#[test]
fn local_search_is_deterministic() {
    let bb = b(-1.0, 2.0);
    let s = Strategy::LocalSearch { restarts: 8, seed: 5 };
    assert_eq!(
        search_max(&bb, &square(&bb), 9, s).unwrap(),
        search_max(&bb, &square(&bb), 9, s).unwrap()
    );
}
