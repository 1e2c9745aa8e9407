fn main() {
    std::process::exit(ptransform_cli::run(std::env::args_os()));
}
