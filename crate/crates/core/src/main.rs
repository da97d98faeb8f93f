fn main() {
    std::process::exit(fld_transfer::cli::run(std::env::args_os()));
}
