#include "callmask/mock_lm.hpp"

#include <charconv>

#include "callmask/error.hpp"
#include "rng.hpp"

namespace callmask {

namespace {

std::vector<double> random_weights(std::size_t n, std::uint64_t seed, std::size_t t) {
  std::vector<double> w(n);
  double total = 0.0;
  const std::uint64_t base = detail::mix(seed, t);
  for (std::size_t i = 0; i < n; ++i) total += (w[i] = 1e-3 + detail::unit_from_bits(detail::mix(base, i)));
  for (auto& x : w) x /= total;
  return w;
}

std::vector<double> peaked(std::size_t n, TokenId top, double delta) {
  if (n == 1) return {1.0};
  std::vector<double> d(n, delta / static_cast<double>(n - 1));
  d[top] = 1.0 - delta;
  return d;
}

void check_vocab(std::size_t n, std::span<const TokenId> script) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "vocabulary is empty");
  for (auto id : script) {
    if (id >= n) throw Error(ErrorCode::InvalidArgument, "script token outside the vocabulary");
  }
}

}  // namespace

OracleLM::OracleLM(std::vector<TokenId> script, std::size_t vocab_size, std::uint64_t seed, double delta)
    : script_(std::move(script)), vocab_size_(vocab_size), seed_(seed), delta_(delta) {
  check_vocab(vocab_size_, script_);
}

std::vector<double> OracleLM::next_distribution(std::span<const TokenId> context) const {
  const std::size_t t = context.size();
  if (t >= script_.size()) return random_weights(vocab_size_, seed_, t);
  return peaked(vocab_size_, script_[t], delta_);
}

NoisyLM::NoisyLM(std::vector<TokenId> script, std::size_t vocab_size, double epsilon, std::uint64_t seed,
                 double delta, double runner_up)
    : script_(std::move(script)),
      vocab_size_(vocab_size),
      epsilon_(epsilon),
      seed_(seed),
      delta_(delta),
      runner_up_(runner_up) {
  check_vocab(vocab_size_, script_);
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must lie in [0, 1]");
}

TokenId NoisyLM::top_token(std::size_t t) const {
  const std::uint64_t h = detail::mix(seed_, t);
  if (detail::unit_from_bits(detail::mix(h, 1)) < epsilon_) {
    return static_cast<TokenId>(detail::mix(h, 2) % vocab_size_);
  }
  return script_.at(t);
}

std::vector<double> NoisyLM::next_distribution(std::span<const TokenId> context) const {
  const std::size_t t = context.size();
  if (t >= script_.size()) return random_weights(vocab_size_, seed_, t);
  const TokenId scripted = script_[t];
  const TokenId top = top_token(t);
  if (top == scripted || vocab_size_ < 3) return peaked(vocab_size_, scripted, delta_);
  std::vector<double> d(vocab_size_, delta_ / static_cast<double>(vocab_size_ - 2));
  d[top] = 1.0 - delta_ - runner_up_;
  d[scripted] = runner_up_;
  return d;
}

RandomLM::RandomLM(std::size_t vocab_size, std::uint64_t seed) : vocab_size_(vocab_size), seed_(seed) {
  check_vocab(vocab_size_, {});
}

std::vector<double> RandomLM::next_distribution(std::span<const TokenId> context) const {
  return random_weights(vocab_size_, seed_, context.size());
}

BiasedLM::BiasedLM(std::vector<TokenId> attractor, std::size_t vocab_size, double strength, std::uint64_t seed)
    : attractor_(std::move(attractor)), vocab_size_(vocab_size), strength_(strength), seed_(seed) {
  check_vocab(vocab_size_, attractor_);
  if (!(strength > 0.0 && strength < 1.0)) throw Error(ErrorCode::InvalidArgument, "strength must lie in (0, 1)");
}

std::vector<double> BiasedLM::next_distribution(std::span<const TokenId> context) const {
  const std::size_t t = context.size();
  auto d = random_weights(vocab_size_, seed_, t);
  if (t >= attractor_.size()) return d;
  for (auto& x : d) x *= 1.0 - strength_;
  d[attractor_[t]] += strength_;
  return d;
}

// ---------------------------------------------------------------------------
// Specs

namespace {

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorCode::BadSpec, msg); }

double parse_real(std::string_view key, std::string_view text) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size()) bad(std::string(key) + " is not a number: " + std::string(text));
  return v;
}

std::uint64_t parse_seed(std::string_view text) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size()) bad("seed is not an unsigned integer: " + std::string(text));
  return v;
}

}  // namespace

MockSpec parse_mock_spec(std::string_view text) {
  if (!text.starts_with("mock:")) bad("model spec must start with 'mock:': " + std::string(text));
  std::string_view rest = text.substr(5);
  auto colon = rest.find(':');
  std::string_view variant = rest.substr(0, colon);
  std::string_view params = colon == std::string_view::npos ? std::string_view{} : rest.substr(colon + 1);

  MockSpec spec;
  if (variant == "oracle") spec.variant = MockVariant::Oracle;
  else if (variant == "noisy") spec.variant = MockVariant::Noisy;
  else if (variant == "random") spec.variant = MockVariant::Random;
  else if (variant == "biased") spec.variant = MockVariant::Biased;
  else bad("unknown mock variant '" + std::string(variant) + "'");

  bool have_eps = false, have_attractor = false;
  while (!params.empty()) {
    auto eq = params.find('=');
    if (eq == std::string_view::npos) bad("expected key=value in '" + std::string(params) + "'");
    std::string_view key = params.substr(0, eq);
    std::string_view value;
    if (key == "target" || key == "attractor") {
      value = params.substr(eq + 1);
      params = {};
    } else {
      auto comma = params.find(',', eq);
      value = params.substr(eq + 1, comma == std::string_view::npos ? std::string_view::npos : comma - eq - 1);
      params = comma == std::string_view::npos ? std::string_view{} : params.substr(comma + 1);
    }
    if (key == "eps" && spec.variant == MockVariant::Noisy) {
      spec.epsilon = parse_real(key, value);
      if (!(spec.epsilon >= 0.0 && spec.epsilon <= 1.0)) bad("eps must lie in [0, 1]");
      have_eps = true;
    } else if (key == "seed") {
      spec.seed = parse_seed(value);
    } else if (key == "strength" && spec.variant == MockVariant::Biased) {
      spec.strength = parse_real(key, value);
      if (!(spec.strength > 0.0 && spec.strength < 1.0)) bad("strength must lie in (0, 1)");
    } else if (key == "target" && (spec.variant == MockVariant::Oracle || spec.variant == MockVariant::Noisy)) {
      if (value.empty()) bad("empty target");
      spec.target = std::string(value);
    } else if (key == "attractor" && spec.variant == MockVariant::Biased) {
      if (value.empty()) bad("empty attractor");
      spec.attractor = std::string(value);
      have_attractor = true;
    } else {
      bad("parameter '" + std::string(key) + "' does not apply to mock:" + std::string(variant));
    }
  }
  if (spec.variant == MockVariant::Noisy && !have_eps) bad("mock:noisy needs eps=<value>");
  if (spec.variant == MockVariant::Biased && !have_attractor) bad("mock:biased needs attractor=<text>");
  return spec;
}

std::string format_mock_spec(const MockSpec& spec) {
  std::string out = "mock:";
  switch (spec.variant) {
    case MockVariant::Oracle: out += "oracle"; break;
    case MockVariant::Noisy: out += "noisy:eps=" + std::to_string(spec.epsilon) + ","; break;
    case MockVariant::Random: out += "random:"; break;
    case MockVariant::Biased: out += "biased:strength=" + std::to_string(spec.strength) + ","; break;
  }
  if (spec.variant == MockVariant::Oracle) out += ":";
  out += "seed=" + std::to_string(spec.seed);
  if (spec.target) out += ",target=" + *spec.target;
  if (spec.variant == MockVariant::Biased) out += ",attractor=" + spec.attractor;
  return out;
}

std::unique_ptr<LanguageModel> make_mock(const MockSpec& spec, const Vocabulary& vocab,
                                         std::optional<std::string_view> target_text) {
  auto script = [&]() {
    std::optional<std::string_view> text = spec.target ? std::optional<std::string_view>(*spec.target) : target_text;
    if (!text) bad("scripted mock needs a target call");
    std::string full(*text);
    if (!full.ends_with(kEndMarker)) full += kEndMarker;
    try {
      return vocab.encode(full);
    } catch (const Error& e) {
      bad(std::string("target cannot be tokenized: ") + e.what());
    }
  };
  switch (spec.variant) {
    case MockVariant::Oracle: return std::make_unique<OracleLM>(script(), vocab.size(), spec.seed);
    case MockVariant::Noisy: return std::make_unique<NoisyLM>(script(), vocab.size(), spec.epsilon, spec.seed);
    case MockVariant::Random: return std::make_unique<RandomLM>(vocab.size(), spec.seed);
    case MockVariant::Biased: {
      std::vector<TokenId> attractor;
      try {
        attractor = vocab.encode(spec.attractor);
      } catch (const Error& e) {
        bad(std::string("attractor cannot be tokenized: ") + e.what());
      }
      return std::make_unique<BiasedLM>(std::move(attractor), vocab.size(), spec.strength, spec.seed);
    }
  }
  bad("unknown mock variant");
}

}  // namespace callmask
