//! Cressie-Read generators and their convex conjugates.

use semimix::DivergenceSpec;

fn main() -> semimix::Result<()> {
    let divs = [
        ("chi2", DivergenceSpec::chi2()),
        ("kl", DivergenceSpec::kl()),
        ("mkl", DivergenceSpec::modified_kl()),
        ("hellinger", DivergenceSpec::hellinger()),
        ("neyman", DivergenceSpec::neyman()),
    ];
    println!("{:>10} {:>10} {:>10} {:>12} {:>12}", "name", "phi(2)", "phi'(2)", "psi(0.25)", "psi'(0.25)");
    for (name, d) in divs {
        let c = d.psi(0.25)?;
        println!("{name:>10} {:>10.5} {:>10.5} {:>12.5} {:>12.5}", d.phi(2.0)?, d.phi_prime(2.0)?, c.value, c.d1);
    }

    // Fenchel: the supremum of t x - phi(x) is attained where t = phi'(x).
    let d = DivergenceSpec::hellinger();
    let x = 1.7;
    let t = d.phi_prime(x)?;
    println!("\nhellinger at x = {x}: psi(phi'(x)) = {:.12}, x phi'(x) - phi(x) = {:.12}", d.psi(t)?.value, x * t - d.phi(x)?);
    println!("psi upper limit for hellinger: {}", d.psi_upper());
    println!("psi(3) for hellinger: {}", d.psi_value_or_inf(3.0));
    Ok(())
}
