//! Writes a simulated window as PMU CSV, reads it back and locates from file.

use forced_osc::io::{load_pmu_csv, write_pmu_csv, write_report, ReportRecord};
use forced_osc::simulator::{simulate, systems, ForcingSpec, SimulationOptions};
use forced_osc::{locate, PipelineConfig};

fn main() -> forced_osc::Result<()> {
    let dir = std::env::temp_dir().join("forced-osc-example");
    std::fs::create_dir_all(&dir).map_err(|e| forced_osc::Error::Io {
        path: dir.clone(),
        source: e,
    })?;
    let csv = dir.join("window.csv");

    let model = systems::ten_machine_two_area(0.01);
    let forcing = ForcingSpec::rectangular("G1", 0.05 * model.mechanical_power()[0], 0.2);
    let window = simulate(
        &model,
        &[forcing],
        &SimulationOptions {
            seed: 6,
            ..Default::default()
        },
    )?;
    write_pmu_csv(&window, &csv)?;
    let loaded = load_pmu_csv(&csv)?;
    println!("{} -> identical after reload: {}", csv.display(), loaded == window);

    let config = PipelineConfig {
        lambda: 0.1,
        ..Default::default()
    };
    let report = locate(&loaded, &config)?;
    let out = dir.join("report.json");
    write_report(&ReportRecord::new(&report, &config), &out)?;
    println!("{} -> {}", report.verdict().as_str(), out.display());
    for d in &report.detections {
        println!("  {} at {} Hz", d.machine, d.frequency_hz);
    }
    Ok(())
}
