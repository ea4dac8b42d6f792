fn main() -> std::process::ExitCode {
    entlab::cli::main()
}
