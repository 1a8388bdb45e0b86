fn main() {
    std::process::exit(pll_cli::run());
}
