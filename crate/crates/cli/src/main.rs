fn main() {
    std::process::exit(sas_transim_cli::main_with(std::env::args_os()));
}
