fn main() {
    std::process::exit(atomdyn_cli::run(std::env::args_os()));
}
