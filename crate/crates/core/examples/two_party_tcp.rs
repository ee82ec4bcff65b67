//! Alice and Bob in separate threads talking over a loopback TCP socket,
//! as `cvqkd-recon session --role ...` does across machines.

use std::net::{TcpListener, TcpStream};
use std::thread;

use cvqkd_recon::protocol::session::ChannelSetting;
use cvqkd_recon::protocol::{run_party, Role, SelectionPolicy, SessionConfig, Stage2Config};

fn main() -> cvqkd_recon::Result<()> {
    let cfg = SessionConfig {
        frames: 1000,
        channel: ChannelSetting::Efficiency(1.1),
        selection: SelectionPolicy::ByAfr { afr: 0.02 },
        stage2: Stage2Config {
            crossover_p: 0.004,
            ..Default::default()
        },
        ..Default::default()
    };
    let ctx = cfg.prepare()?;
    let listener = TcpListener::bind("127.0.0.1:0")?;
    let addr = listener.local_addr()?;

    let alice_ctx = ctx.clone();
    let alice = thread::spawn(move || -> cvqkd_recon::Result<_> {
        let (mut stream, _) = listener.accept()?;
        run_party(&mut stream, &alice_ctx, Role::Alice)
    });
    let mut stream = TcpStream::connect(addr)?;
    let bob = run_party(&mut stream, &ctx, Role::Bob)?;
    let alice = alice.join().expect("alice thread")?;

    for r in [&alice, &bob] {
        println!(
            "{:>5}: {:?}, {} bits, digest {}, sent {:?}",
            r.role, r.outcome, r.bits_delivered, r.delivered_digest, r.sent_bytes
        );
    }
    Ok(())
}
