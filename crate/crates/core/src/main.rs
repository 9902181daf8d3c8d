fn main() -> std::process::ExitCode {
    ontomas::cli::main()
}
