//! Prints the oscillatory modes of the bundled test systems.

use forced_osc::simulator::{natural_modes, solve_equilibrium, systems, GridModel};

fn show(name: &str, model: &GridModel) -> forced_osc::Result<()> {
    let eq = solve_equilibrium(model)?;
    println!("{name}");
    for mode in natural_modes(model, &eq)? {
        println!(
            "  {:>7.4} Hz  damping {:>6.2}%",
            mode.frequency_hz,
            100.0 * mode.damping_ratio
        );
    }
    Ok(())
}

fn main() -> forced_osc::Result<()> {
    show("two machines", &systems::two_machine(0.0))?;
    show("ten machines, two areas", &systems::ten_machine_two_area(0.0))
}
