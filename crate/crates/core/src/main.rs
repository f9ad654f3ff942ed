fn main() -> std::process::ExitCode {
    coherent_split::cli::main()
}
