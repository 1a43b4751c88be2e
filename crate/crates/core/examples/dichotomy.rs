//! Long-time behavior of the cosine flow: the order parameter tends to one
//! (synchronization) or zero (incoherence) depending on the frustration.

use synclab::integrate::IntegratorSettings;
use synclab::reduce_kuramoto::dichotomy_check;

fn main() -> synclab::Result<()> {
    let settings = IntegratorSettings::rk4(1e-3).with_record_every(100);
    // Spread 0.5: below 2 alpha for alpha = 0.3.
    let theta0 = [0.1, 0.2, 0.35, 0.5, 0.6];
    for alpha in [0.3, -0.3, 0.0] {
        let r = dichotomy_check(&theta0, alpha, 1.0, 200.0, &settings)?;
        println!(
            "alpha = {alpha:+.1}: {:?}  R(T) = {:.6}  branch = {:?}  sum theta monotone = {}",
            r.verdict, r.r_final, r.branch, r.sum_theta_monotone
        );
        if let Some(why) = r.precondition_violation {
            println!("  hypothesis not met: {why}");
        }
    }
    Ok(())
}
