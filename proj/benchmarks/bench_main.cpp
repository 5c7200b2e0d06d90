#include <string>

#include <benchmark/benchmark.h>

#include "cipherflow/deterministic_backend.hpp"
#include "cipherflow/flows.hpp"

namespace cf = cipherflow;

namespace {

const std::string kText = "Meet me at the old mill before sunrise, bring the map.";

cf::cipher::KeyMaterial key_for(cf::cipher::CipherMethod m) {
  using namespace cf::cipher;
  switch (m) {
    case CipherMethod::Caesar: return CaesarKey{3};
    case CipherMethod::Vigenere: return VigenereKey{"LEMON"};
    case CipherMethod::Atbash: return AtbashKey{};
    case CipherMethod::Playfair: return PlayfairKey{"MONARCHY"};
    case CipherMethod::RailFence: return RailFenceKey{3};
  }
  return AtbashKey{};
}

void BM_EncryptDecrypt(benchmark::State& state) {
  const auto method = cf::cipher::kAllMethods[static_cast<std::size_t>(state.range(0))];
  const auto key = key_for(method);
  for (auto _ : state) {
    auto ct = cf::cipher::encrypt(key, kText);
    benchmark::DoNotOptimize(cf::cipher::decrypt(key, ct));
  }
  state.SetLabel(std::string(cf::cipher::method_id(method)));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * kText.size()));
}
BENCHMARK(BM_EncryptDecrypt)->DenseRange(0, 4);

void BM_Round(benchmark::State& state) {
  cf::DeterministicBackend backend;
  cf::flows::Session session(backend, {.seed = 1});
  const auto mode = state.range(0) ? cf::flows::Mode::ERD : cf::flows::Mode::ED;
  for (auto _ : state) benchmark::DoNotOptimize(session.run_round(kText, mode));
  state.SetLabel(std::string(cf::flows::to_string(mode)));
}
BENCHMARK(BM_Round)->Arg(0)->Arg(1);

}  // namespace
BENCHMARK_MAIN();
