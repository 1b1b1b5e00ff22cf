fn main() {
    std::process::exit(pacbandit::harness::cli_main());
}
