fn main() {
    std::process::exit(qgeom::cli::main_with_args(std::env::args_os()));
}
