//! Two machines forced at different frequencies, each near its own mode.

use forced_osc::simulator::{simulate, systems, ForcingSpec, SimulationOptions};
use forced_osc::{locate, PipelineConfig};

fn main() -> forced_osc::Result<()> {
    let model = systems::ten_machine_two_area(0.01);
    let pm = model.mechanical_power();
    let forcings = [
        ForcingSpec::sine("G3", 0.05 * pm[2], 0.375),
        ForcingSpec::sine("G5", 0.05 * pm[4], 1.15),
    ];
    let window = simulate(
        &model,
        &forcings,
        &SimulationOptions {
            seed: 2,
            ..Default::default()
        },
    )?;
    let report = locate(
        &window,
        &PipelineConfig {
            lambda: 0.1,
            ..Default::default()
        },
    )?;
    for d in &report.detections {
        println!(
            "#{} {} at {} Hz, zeta {:.3e}",
            d.rank, d.machine, d.frequency_hz, d.zeta
        );
    }
    Ok(())
}
