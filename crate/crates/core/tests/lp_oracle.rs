//! The tableau solver against two independent references: a plain
//! slack-basis simplex for `max c·x, Ax ≤ b, b ≥ 0` and brute-force vertex
//! enumeration for tiny mixed-sense programs.

use contractlab_core::rng::rng_from_seed;
use contractlab_core::{solve_lp, Direction, LpOutcome, LpProblem, Sense};
use rand::Rng;

/// Slack-basis simplex with Bland's rule. `b ≥ 0` makes the slack basis
/// feasible, so no phase one is needed. Returns `None` when unbounded.
fn slack_simplex(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Option<f64> {
    let (rows, n) = (a.len(), c.len());
    let width = n + rows + 1;
    let mut t: Vec<Vec<f64>> = (0..rows)
        .map(|i| {
            let mut r = vec![0.0; width];
            r[..n].copy_from_slice(&a[i]);
            r[n + i] = 1.0;
            r[width - 1] = b[i];
            r
        })
        .collect();
    let mut z: Vec<f64> = c.iter().map(|x| -x).chain(vec![0.0; rows + 1]).collect();
    let mut basis: Vec<usize> = (n..n + rows).collect();
    loop {
        let Some(enter) = (0..width - 1).find(|&j| z[j] < -1e-12) else {
            return Some(z[width - 1]);
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..rows {
            if t[i][enter] > 1e-12 {
                let ratio = t[i][width - 1] / t[i][enter];
                let better = match leave {
                    None => true,
                    Some((l, r)) => ratio < r - 1e-14 || (ratio <= r + 1e-14 && basis[i] < basis[l]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let (l, _) = leave?;
        let piv = t[l][enter];
        t[l].iter_mut().for_each(|x| *x /= piv);
        let prow = t[l].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != l && row[enter] != 0.0 {
                let f = row[enter];
                row.iter_mut().zip(&prow).for_each(|(x, p)| *x -= f * p);
            }
        }
        let f = z[enter];
        z.iter_mut().zip(&prow).for_each(|(x, p)| *x -= f * p);
        basis[l] = enter;
    }
}

#[test]
fn random_le_programs_match_slack_simplex() {
    let mut rng = rng_from_seed(2024);
    for case in 0..200 {
        let n = rng.random_range(1..=12);
        let rows = rng.random_range(1..=20);
        let c: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..2.0)).collect();
        let a: Vec<Vec<f64>> = (0..rows).map(|_| (0..n).map(|_| rng.random_range(-0.5..1.5)).collect()).collect();
        let b: Vec<f64> = (0..rows).map(|_| rng.random_range(0.0..5.0)).collect();
        let upper: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..4.0)).collect();

        let mut p = LpProblem::new(Direction::Maximize, c.clone());
        for (row, &rhs) in a.iter().zip(&b) {
            p.add_constraint(row.clone(), Sense::Le, rhs);
        }
        for (j, &u) in upper.iter().enumerate() {
            p.set_bounds(j, 0.0, u);
        }
        let mut a_ref = a.clone();
        let mut b_ref = b.clone();
        for (j, &u) in upper.iter().enumerate() {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            a_ref.push(e);
            b_ref.push(u);
        }
        let expected = slack_simplex(&c, &a_ref, &b_ref).expect("box-bounded programs are bounded");
        let LpOutcome::Optimal(sol) = solve_lp(&p).unwrap() else {
            panic!("case {case}: feasible program reported as not optimal");
        };
        assert!(
            (sol.objective - expected).abs() <= 1e-7 * (1.0 + expected.abs()),
            "case {case}: {} vs {expected}",
            sol.objective
        );
        for (row, &rhs) in a.iter().zip(&b) {
            let lhs: f64 = row.iter().zip(&sol.x).map(|(x, y)| x * y).sum();
            assert!(lhs <= rhs + 1e-7, "case {case}: row violated");
        }
        for (x, u) in sol.x.iter().zip(&upper) {
            assert!(*x >= -1e-9 && *x <= u + 1e-9, "case {case}: bound violated");
        }
    }
}

fn solve_square(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-9 {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for i in 0..n {
            if i != col {
                let f = m[i][col] / m[col][col];
                let pivot_row = m[col].clone();
                m[i].iter_mut().zip(&pivot_row).skip(col).for_each(|(x, p)| *x -= f * p);
                rhs[i] -= f * rhs[col];
            }
        }
    }
    Some((0..n).map(|i| rhs[i] / m[i][i]).collect())
}

struct Row {
    a: Vec<f64>,
    sense: Sense,
    rhs: f64,
}

/// Best feasible vertex of a box-bounded program, or `None` if infeasible.
fn enumerate_vertices(dir: Direction, c: &[f64], rows: &[Row], lo: &[f64], hi: &[f64]) -> Option<f64> {
    let n = c.len();
    let mut planes: Vec<(Vec<f64>, f64)> = rows.iter().map(|r| (r.a.clone(), r.rhs)).collect();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), lo[j]));
        planes.push((e, hi[j]));
    }
    let feasible = |x: &[f64]| {
        let box_ok = x.iter().zip(lo.iter().zip(hi)).all(|(v, (l, h))| *v >= l - 1e-9 && *v <= h + 1e-9);
        box_ok
            && rows.iter().all(|r| {
                let lhs: f64 = r.a.iter().zip(x).map(|(a, b)| a * b).sum();
                match r.sense {
                    Sense::Le => lhs <= r.rhs + 1e-9,
                    Sense::Ge => lhs >= r.rhs - 1e-9,
                    Sense::Eq => (lhs - r.rhs).abs() <= 1e-9,
                }
            })
    };
    let mut best: Option<f64> = None;
    let k = planes.len();
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let m: Vec<Vec<f64>> = idx.iter().map(|&i| planes[i].0.clone()).collect();
        let r: Vec<f64> = idx.iter().map(|&i| planes[i].1).collect();
        if let Some(x) = solve_square(m, r) {
            if feasible(&x) {
                let v: f64 = c.iter().zip(&x).map(|(a, b)| a * b).sum();
                best = Some(match (best, dir) {
                    (None, _) => v,
                    (Some(b), Direction::Maximize) => b.max(v),
                    (Some(b), Direction::Minimize) => b.min(v),
                });
            }
        }
        // next n-subset in lexicographic order
        let Some(i) = (0..n).rev().find(|&i| idx[i] < k - n + i) else {
            return best;
        };
        idx[i] += 1;
        for j in i + 1..n {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[test]
fn mixed_sense_programs_match_vertex_enumeration() {
    let mut rng = rng_from_seed(77);
    let (mut optimal, mut infeasible) = (0, 0);
    for case in 0..300 {
        let n = rng.random_range(2..=3);
        let dir = if rng.random::<bool>() { Direction::Maximize } else { Direction::Minimize };
        let c: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let lo: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..0.5)).collect();
        let hi: Vec<f64> = lo.iter().map(|l| l + rng.random_range(0.5..3.0)).collect();
        let rows: Vec<Row> = (0..rng.random_range(1..=4))
            .map(|_| Row {
                a: (0..n).map(|_| rng.random_range(-1.0..1.0)).collect(),
                sense: match rng.random_range(0..5) {
                    0 | 1 => Sense::Le,
                    2 | 3 => Sense::Ge,
                    _ => Sense::Eq,
                },
                rhs: rng.random_range(-1.0..1.0),
            })
            .collect();
        let mut p = LpProblem::new(dir, c.clone());
        for r in &rows {
            p.add_constraint(r.a.clone(), r.sense, r.rhs);
        }
        for j in 0..n {
            p.set_bounds(j, lo[j], hi[j]);
        }
        match (solve_lp(&p).unwrap(), enumerate_vertices(dir, &c, &rows, &lo, &hi)) {
            (LpOutcome::Optimal(s), Some(v)) => {
                optimal += 1;
                assert!((s.objective - v).abs() <= 1e-7, "case {case}: {} vs {v}", s.objective);
            }
            (LpOutcome::Infeasible, None) => infeasible += 1,
            (got, want) => panic!("case {case}: solver {got:?}, enumeration {want:?}"),
        }
    }
    assert!(optimal > 50 && infeasible > 10, "{optimal} optimal, {infeasible} infeasible");
}

#[test]
fn free_variables_and_unbounded() {
    // min x + y, x - y = 1, x + y ≥ -3, both free
    let mut p = LpProblem::new(Direction::Minimize, vec![1.0, 1.0]).with_bounds(f64::NEG_INFINITY, f64::INFINITY);
    p.add_constraint(vec![1.0, -1.0], Sense::Eq, 1.0);
    p.add_constraint(vec![1.0, 1.0], Sense::Ge, -3.0);
    let s = solve_lp(&p).unwrap().optimal().unwrap();
    assert!((s.objective + 3.0).abs() < 1e-9);
    assert!((s.x[0] + 1.0).abs() < 1e-9 && (s.x[1] + 2.0).abs() < 1e-9);

    let mut q = LpProblem::new(Direction::Maximize, vec![1.0, 0.0]);
    q.add_constraint(vec![1.0, -1.0], Sense::Le, 1.0);
    assert_eq!(solve_lp(&q).unwrap(), LpOutcome::Unbounded);
}
