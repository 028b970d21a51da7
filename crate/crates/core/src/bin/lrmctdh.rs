fn main() {
    std::process::exit(lrmctdh::cli::main_with_args(std::env::args_os()));
}
