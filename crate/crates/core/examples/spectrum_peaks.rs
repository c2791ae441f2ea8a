//! Amplitude spectra and z-score peak picking on a forced window.

use forced_osc::signal_prep::detrend;
use forced_osc::simulator::{simulate, systems, ForcingSpec, SimulationOptions};
use forced_osc::spectrum::{candidate_frequencies, channel_spectra, zscore_peaks, CandidateParams};

fn main() -> forced_osc::Result<()> {
    let model = systems::ten_machine_two_area(0.01);
    let amplitude = 0.05 * model.mechanical_power()[4];
    let window = simulate(
        &model,
        &[ForcingSpec::sine("G5", amplitude, 1.15)],
        &SimulationOptions {
            seed: 4,
            ..Default::default()
        },
    )?;
    let window = detrend(&window);

    let params = CandidateParams::default();
    for spectrum in channel_spectra(&window)?.iter().filter(|s| s.label.ends_with("speed")) {
        let peaks = zscore_peaks(spectrum, &params.zscore)?;
        let low: Vec<String> = peaks.iter().filter(|f| **f < 2.0).map(|f| format!("{f:.3}")).collect();
        println!(
            "{:<10} {:>3} peaks, below 2 Hz: {}",
            spectrum.label,
            peaks.len(),
            low.join(" ")
        );
    }
    let candidates = candidate_frequencies(&window, &params)?;
    println!("{} candidates across all channels", candidates.len());
    Ok(())
}
