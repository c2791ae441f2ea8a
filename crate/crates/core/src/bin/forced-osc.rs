fn main() -> std::process::ExitCode {
    forced_osc::cli::main()
}
