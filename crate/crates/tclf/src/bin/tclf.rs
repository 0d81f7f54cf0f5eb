fn main() {
    std::process::exit(tclf::cli::main_with_args(std::env::args_os()));
}
