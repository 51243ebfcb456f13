fn main() -> std::process::ExitCode {
    pgl::cli::main_with(std::env::args_os())
}
