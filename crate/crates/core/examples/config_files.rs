// Building systems from `key = value` configuration text.

use qpcircle::rotation::rotation_number_pointwise;
use qpcircle::systems::parse_config;

pub fn run_example() -> qpcircle::Result<()> {
    let text = "# torus translation\nsystem = translation\nomega = golden\nk = 1\nq = 2\nl = 3\np = 2\n";
    let loaded = parse_config(text)?.build()?;
    let rho = rotation_number_pointwise(&loaded.system, 0.0, 0.0, 10_000)?;
    println!("{} with {:?}: rho = {:.10}", loaded.config.system, loaded.config.params, rho.value);
    println!("spot check: periodicity error {:.1e}", loaded.spot_check.max_periodicity_error);

    let bad = parse_config("system = translation\nk = 2\nq = 2\n")?.build();
    println!("gcd(k, q) = 2 rejected: {}", bad.is_err());
    Ok(())
}

fn main() -> qpcircle::Result<()> {
    run_example()
}
