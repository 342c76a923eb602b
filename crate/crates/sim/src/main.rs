fn main() -> std::process::ExitCode {
    ofdm_im_sim::cli::main()
}
