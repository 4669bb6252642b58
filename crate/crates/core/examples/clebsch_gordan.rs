//! Exact Clebsch-Gordan coefficients, column sums and the large-S limit.

use su2eth::tensor::{cg_asymptotic_r_even, cg_column_sum, cg_f64, clebsch_gordan_int, AngularMomentum};

fn main() -> su2eth::Result<()> {
    let c = clebsch_gordan_int(2, 0, 1, 1, 1, -1)?;
    println!("<2 0|1 1; 1 -1> = {:?} = {:.15}", c.signed_square(), c.to_f64());

    for rank in [0, 2, 4] {
        let sum = cg_column_sum(AngularMomentum::integer(10), AngularMomentum::integer(rank))?;
        println!("S = 10, r = {rank}: column sum {:?}", sum.as_rational().map(|q| q.to_string()));
    }

    let limit = cg_asymptotic_r_even(2)?;
    for s in [10u32, 40, 160] {
        let v = cg_f64(s, 0, s, 0, 2, 0)?;
        println!("S = {s:>3}: <S 0|S 0; 2 0> = {v:+.8}, distance to {limit} is {:.3e}", v - limit);
    }
    Ok(())
}
