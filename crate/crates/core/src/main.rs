fn main() -> std::process::ExitCode {
    cairo_air::cli::main()
}
