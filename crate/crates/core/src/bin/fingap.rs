fn main() -> std::process::ExitCode {
    fingap::cli::main()
}
