//! Grid agreement between the closed-form graded dimensions and the
//! brute-force oracle on the two reference tori.

use torlie::hc1::{bruteforce_dims, graded_dim};
use torlie::torus::{degree_box, Degree, QMatrix, Torus};

fn t1() -> Torus {
    QMatrix::new(2, 2, vec![vec![0, 1], vec![1, 0]]).unwrap()
}

/// Orders 2, 3, 6 between the three generator pairs.
fn mixed() -> Torus {
    QMatrix::new(3, 6, vec![vec![0, 3, 2], vec![3, 0, 1], vec![4, 5, 0]]).unwrap()
}

#[test]
fn t1_box_agrees_at_support_bound_4() {
    let q = t1();
    let rs: Vec<Degree> = degree_box(2, -4, 4).collect();
    let dims = bruteforce_dims(&q, &rs, 4);
    for (r, got) in rs.iter().zip(dims) {
        assert_eq!(got, graded_dim(&q, r), "r={r}");
    }
}

#[test]
fn mixed_torus_box_agrees() {
    let q = mixed();
    let rs: Vec<Degree> = degree_box(3, -4, 4).collect();
    // The radical degrees reach the box corners and need the wider
    // window before the corner tensors reduce; everything else already
    // converges at support bound 1.
    let (rad, nonrad): (Vec<Degree>, Vec<Degree>) =
        rs.into_iter().partition(|r| q.in_radf(r));
    for (batch, bound) in [(&rad, 2), (&nonrad, 1)] {
        let dims = bruteforce_dims(&q, batch, bound);
        for (r, got) in batch.iter().zip(dims) {
            assert_eq!(got, graded_dim(&q, r), "r={r} bound={bound}");
        }
    }
}
