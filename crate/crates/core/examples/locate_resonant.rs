//! Forcing at the inter-area mode: resonance spreads the oscillation over the
//! whole system, but the regression still points at the forced machine.

use forced_osc::simulator::{natural_modes, simulate, solve_equilibrium, systems, ForcingSpec, SimulationOptions};
use forced_osc::spectrum::amplitude_spectrum;
use forced_osc::{locate, PipelineConfig};

fn main() -> forced_osc::Result<()> {
    let model = systems::ten_machine_two_area(0.01);
    let mode = natural_modes(&model, &solve_equilibrium(&model)?)?[0];
    let f = (mode.frequency_hz / 0.025).round() * 0.025;
    println!(
        "slowest mode {:.4} Hz ({:.1}% damped), forcing G4 at {f} Hz",
        mode.frequency_hz,
        100.0 * mode.damping_ratio
    );

    let amplitude = 0.05 * model.mechanical_power()[3];
    let window = simulate(
        &model,
        &[ForcingSpec::sine("G4", amplitude, f)],
        &SimulationOptions {
            seed: 8,
            ..Default::default()
        },
    )?;

    // G1 to G3 swing harder than G4 itself.
    let k = (f / 0.025).round() as usize;
    for (j, label) in window.labels().iter().enumerate() {
        let samples: Vec<f64> = window.speeds().column(j).iter().copied().collect();
        let s = amplitude_spectrum(&samples, window.sample_rate(), label)?;
        println!("  {label:>3} speed amplitude at {f} Hz: {:.2e}", s.amplitudes[k]);
    }

    let config = PipelineConfig {
        lambda: 0.1,
        ..Default::default()
    };
    let report = locate(&window, &config)?;
    println!(
        "{} ({} candidates, {:.3} s)",
        report.verdict().as_str(),
        report.candidates.len(),
        report.elapsed_s
    );
    for d in &report.detections {
        println!(
            "  #{} {} at {} Hz, zeta {:.3e}",
            d.rank, d.machine, d.frequency_hz, d.zeta
        );
    }
    Ok(())
}
