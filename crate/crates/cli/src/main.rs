fn main() {
    std::process::exit(holling_bt_cli::run(std::env::args_os()));
}
