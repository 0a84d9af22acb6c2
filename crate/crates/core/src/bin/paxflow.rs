fn main() -> std::process::ExitCode {
    paxflow::cli::main()
}
