//! The five comparison metrics on small hand-made structures.

use comm_ensemble::metrics::{ari, fuzzy_rand, nmi, omega, onmi};
use comm_ensemble::{Cover, FuzzyAssignment, Partition};

fn main() -> comm_ensemble::Result<()> {
    let a = Partition::new(vec![0, 0, 0, 1, 1, 1]);
    let b = Partition::new(vec![0, 0, 1, 1, 2, 2]);
    println!("NMI(a,b)={:.4} ARI(a,b)={:.4} NMI(a,a)={}", nmi(&a, &b)?, ari(&a, &b)?, nmi(&a, &a)?);

    let x = Cover::from_communities(6, &[vec![0, 1, 2, 3], vec![3, 4, 5]])?;
    let y = Cover::from_partition(&a);
    println!("ONMI(x,y)={:.4} Omega(x,y)={:.4}", onmi(&x, &y)?, omega(&x, &y)?);

    let f = FuzzyAssignment::new(vec![
        vec![(0, 1.0)],
        vec![(0, 1.0)],
        vec![(0, 0.7), (1, 0.3)],
        vec![(0, 0.5), (1, 0.5)],
        vec![(1, 1.0)],
        vec![(1, 1.0)],
    ])?;
    println!("FRI(f, a)={:.4}", fuzzy_rand(&f, &FuzzyAssignment::from_partition(&a))?);
    Ok(())
}
