//! Simulates 40 s of ambient plus forced operation on the ten-machine system
//! and prints per-machine speed deviation statistics.

use forced_osc::simulator::{simulate, systems, ForcingSpec, SimulationOptions};

fn main() -> forced_osc::Result<()> {
    let model = systems::ten_machine_two_area(0.01);
    let pm3 = model.mechanical_power()[2];
    let forcing = ForcingSpec::sine("G3", 0.05 * pm3, 0.375);
    let options = SimulationOptions {
        seed: 11,
        ..Default::default()
    };
    let window = simulate(&model, &[forcing], &options)?;

    println!(
        "{} samples x {} machines at {} Hz",
        window.len(),
        window.machines(),
        window.sample_rate()
    );
    println!("{:>4} {:>12} {:>12}", "", "rms dw", "max |dw|");
    for (j, label) in window.labels().iter().enumerate() {
        let col = window.speeds().column(j);
        let rms = (col.norm_squared() / col.len() as f64).sqrt();
        println!("{label:>4} {rms:>12.3e} {:>12.3e}", col.amax());
    }
    Ok(())
}
