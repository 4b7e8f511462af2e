//! Compare the exact verifier against a brute-force search over bang-bang
//! inputs on random small fleets.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use intersection_supervisor::exact::exact_verify;
use intersection_supervisor::params::SchedulingConfig;
use intersection_supervisor::sim::oracle::{oracle_with_refinement, random_fleet, BadSetKind, OracleConfig};

fn main() -> intersection_supervisor::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cfg = SchedulingConfig::default();
    let (mut agree, mut yes) = (0, 0);
    let n = 40;
    for _ in 0..n {
        let (params, est) = random_fleet(&mut rng, 2, 1);
        let v = exact_verify(&params, &est, &cfg)?;
        let (o, grid) = oracle_with_refinement(&params, &est, &OracleConfig::default(), BadSetKind::Nominal, v.answer, 2048)?;
        if o == v.answer {
            agree += 1;
        } else {
            println!("disagreement at grid {grid}: exact {} oracle {o}", v.answer);
        }
        yes += usize::from(v.answer);
    }
    println!("{agree}/{n} agree ({yes} feasible)");
    Ok(())
}
