// Binary checkpoint format (native byte order):
//
//   "APARTCKP"            8-byte magic
//   u32 version           kCheckpointVersion
//   string config         resolved config echo
//   i64 env_steps, i64 updates, f64 reward_sum, i64 reward_count
//   model policy, model policy_target, adam policy_adam, i64 policy_updates
//   model disc, adam disc_adam
//   replay: u64 capacity, u64 cursor, u64 count, count x (i32 s, a, s', t, z)
//   string x 6            RNG streams: init, latent, policy, replay, reward,
//                         eval (std::mt19937_64 text state)
//
// string = u64 length + bytes; model = i32 inputs, i32 outputs, f64 weights,
// f64 bias; adam = i64 step, f64 lr, beta1, beta2, eps, then m/v vectors.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "apart/experiment.hpp"

namespace apart {

namespace {

constexpr char kMagic[8] = {'A', 'P', 'A', 'R', 'T', 'C', 'K', 'P'};
constexpr std::uint32_t kCheckpointVersion = 1;

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  template <typename T>
  void pod(T v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void doubles(std::span<const double> v) {
    pod<std::uint64_t>(v.size());
    out_.write(reinterpret_cast<const char*>(v.data()),
               static_cast<std::streamsize>(v.size() * sizeof(double)));
  }
  void string(const std::string& s) {
    pod<std::uint64_t>(s.size());
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void model(const LinearModel& m) {
    pod<std::int32_t>(m.inputs());
    pod<std::int32_t>(m.outputs());
    doubles(m.weights());
    doubles(m.bias());
  }
  void adam(const AdamState& a) {
    pod<std::int64_t>(a.step);
    pod(a.learning_rate);
    pod(a.beta1);
    pod(a.beta2);
    pod(a.epsilon);
    doubles(a.m_weights);
    doubles(a.v_weights);
    doubles(a.m_bias);
    doubles(a.v_bias);
  }
  void rng(const Rng& r) {
    std::ostringstream s;
    s << r;
    string(s.str());
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  template <typename T>
  T pod() {
    T v{};
    in_.read(reinterpret_cast<char*>(&v), sizeof(T));
    check();
    return v;
  }
  void doubles(std::span<double> dst) {
    const auto n = pod<std::uint64_t>();
    if (n != dst.size()) throw std::runtime_error("checkpoint: size mismatch");
    in_.read(reinterpret_cast<char*>(dst.data()),
             static_cast<std::streamsize>(n * sizeof(double)));
    check();
  }
  std::string string() {
    const auto n = pod<std::uint64_t>();
    if (n > (1u << 26)) throw std::runtime_error("checkpoint: corrupt string");
    std::string s(n, '\0');
    in_.read(s.data(), static_cast<std::streamsize>(n));
    check();
    return s;
  }
  void model(LinearModel& m) {
    const auto inputs = pod<std::int32_t>();
    const auto outputs = pod<std::int32_t>();
    if (inputs != m.inputs() || outputs != m.outputs()) {
      throw std::runtime_error("checkpoint: model shape mismatch");
    }
    doubles(m.weights());
    doubles(m.bias());
  }
  void adam(AdamState& a) {
    a.step = pod<std::int64_t>();
    a.learning_rate = pod<double>();
    a.beta1 = pod<double>();
    a.beta2 = pod<double>();
    a.epsilon = pod<double>();
    doubles(a.m_weights);
    doubles(a.v_weights);
    doubles(a.m_bias);
    doubles(a.v_bias);
  }
  void rng(Rng& r) {
    std::istringstream s(string());
    s >> r;
    if (!s) throw std::runtime_error("checkpoint: corrupt RNG state");
  }

 private:
  void check() {
    if (!in_) throw std::runtime_error("checkpoint: truncated file");
  }
  std::istream& in_;
};

std::string read_header(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || !std::equal(magic, magic + 8, kMagic)) {
    throw std::runtime_error("not an apart checkpoint");
  }
  Reader r(in);
  const auto version = r.pod<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version " +
                             std::to_string(version));
  }
  return r.string();
}

// Config echo without the run-length line, which may differ on resume.
std::string structural_config(const std::string& text) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line)) {
    if (line.rfind("steps =", 0) == 0) continue;
    out += line + "\n";
  }
  return out;
}

}  // namespace

void Trainer::save_checkpoint(const std::filesystem::path& path) const {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(kMagic, sizeof(kMagic));
    Writer w(out);
    w.pod<std::uint32_t>(kCheckpointVersion);
    w.string(to_config_text(cfg_));
    w.pod<std::int64_t>(env_steps_);
    w.pod<std::int64_t>(updates_);
    w.pod(reward_sum_);
    w.pod<std::int64_t>(reward_count_);
    w.model(policy_.model());
    w.model(policy_.target_model());
    w.adam(policy_.optimizer());
    w.pod<std::int64_t>(policy_.updates());
    w.model(disc_.model());
    w.adam(disc_adam_);
    w.pod<std::uint64_t>(buffer_.capacity());
    w.pod<std::uint64_t>(buffer_.cursor());
    w.pod<std::uint64_t>(buffer_.size());
    for (const Transition& tr : buffer_.storage()) {
      w.pod<std::int32_t>(tr.s);
      w.pod<std::int32_t>(static_cast<std::int32_t>(tr.a));
      w.pod<std::int32_t>(tr.s_next);
      w.pod<std::int32_t>(tr.t);
      w.pod<std::int32_t>(tr.z);
    }
    for (const Rng* r : {&init_rng_, &latent_rng_, &policy_rng_, &replay_rng_,
                         &reward_rng_, &eval_rng_}) {
      w.rng(*r);
    }
    if (!out) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void Trainer::load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  const std::string stored = read_header(in);
  if (structural_config(stored) != structural_config(to_config_text(cfg_))) {
    throw std::runtime_error("checkpoint " + path.string() +
                             " was written for a different configuration");
  }
  Reader r(in);
  env_steps_ = r.pod<std::int64_t>();
  updates_ = r.pod<std::int64_t>();
  reward_sum_ = r.pod<double>();
  reward_count_ = r.pod<std::int64_t>();
  r.model(policy_.model());
  r.model(policy_.target_model());
  r.adam(policy_.optimizer());
  policy_.set_updates(r.pod<std::int64_t>());
  r.model(disc_.model());
  r.adam(disc_adam_);
  const auto capacity = r.pod<std::uint64_t>();
  const auto cursor = r.pod<std::uint64_t>();
  const auto count = r.pod<std::uint64_t>();
  if (capacity != buffer_.capacity() || count > capacity) {
    throw std::runtime_error("checkpoint: replay buffer mismatch");
  }
  std::vector<Transition> data(count);
  for (auto& tr : data) {
    tr.s = r.pod<std::int32_t>();
    tr.a = static_cast<Action>(r.pod<std::int32_t>());
    tr.s_next = r.pod<std::int32_t>();
    tr.t = r.pod<std::int32_t>();
    tr.z = r.pod<std::int32_t>();
  }
  buffer_.restore(std::move(data), cursor);
  for (Rng* g : {&init_rng_, &latent_rng_, &policy_rng_, &replay_rng_,
                 &reward_rng_, &eval_rng_}) {
    r.rng(*g);
  }
}

ExperimentConfig checkpoint_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  return resolve_config(parse_config_text(read_header(in)));
}

}  // namespace apart
