fn main() {
    std::process::exit(kgeom::cli::main_with_args(std::env::args_os()));
}
