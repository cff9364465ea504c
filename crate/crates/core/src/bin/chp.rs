fn main() -> std::process::ExitCode {
    chp::cli::main()
}
