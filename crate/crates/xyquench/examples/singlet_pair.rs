//! Concurrence and Bell fidelities of a distant pair after a singlet quench.

use xyquench::measures::{bell_fidelities, concurrence_closed, rho2_from_correlators};
use xyquench::pfaffian::correlator_bundle;
use xyquench::vacuum::bell_contractions;
use xyquench::Params;

fn main() -> xyquench::Result<()> {
    let p = Params::infinite(0.5, 0.5)?;
    // singlet (c_1^dag - c_2^dag)|vac>/sqrt 2 evolved to t = 8, pair (5, 6)
    let cs = bell_contractions(8.0, 4..=7, &p, 1, 2, false)?;
    let bundle = correlator_bundle(5, 6, &cs)?;
    println!("C = {}", concurrence_closed(&bundle)?);
    println!("{:?}", bell_fidelities(&rho2_from_correlators(&bundle)?));
    Ok(())
}
