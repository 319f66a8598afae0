fn main() {
    std::process::exit(twoatom::cli::run(std::env::args_os()));
}
