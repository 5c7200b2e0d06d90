#include "cipherflow/harness/corpus.hpp"

#include <fstream>
#include <iterator>

namespace cipherflow::harness {
namespace {

const std::vector<std::string> kBuiltin = {
    "The quick brown fox jumps over the lazy dog.",
    "Pack my box with five dozen liquor jugs.",
    "How vexingly quick daft zebras jump!",
    "Sphinx of black quartz, judge my vow.",
    "The five boxing wizards jump quickly.",
    "Jackdaws love my big sphinx of quartz.",
    "Meet me at the north gate at 7pm.",
    "Bring two ropes and a lantern to the old mill.",
    "The shipment arrives on Tuesday morning.",
    "Our budget for 2024 is 3500 dollars.",
    "Please review the attached draft before Friday.",
    "The blue door on Elm Street stays locked.",
    "Weather looks calm enough for sailing tomorrow.",
    "Keep the samples cold until the courier arrives.",
    "Room 12 has the spare keys and the ledger.",
    "Call home when the train leaves the station.",
    "A small garden needs water every second day.",
    "The committee meets again in three weeks.",
    "Turn left at the bakery, then walk two blocks.",
    "Lunch is served at noon in the east hall.",
    "Every report must be signed by the supervisor.",
    "The password rotation happens each quarter.",
    "Hold all outgoing mail until further notice.",
    "Victory belongs to the most persevering.",
    "Bright vixens jump; dozy fowl quack.",
    "Quick zephyrs blow, vexing daft Jim.",
    "Waltz, bad nymph, for quick jigs vex.",
    "Glib jocks quiz nymph to vex dwarf.",
    "Two driven jocks help fax my big quiz.",
    "The library closes early on public holidays.",
    "Check the oil level before every long drive.",
    "Small steps every day add up over time.",
    "Send the invoice to accounts by end of month.",
    "Dinner for eight, please, near the window.",
    "The orchard yields apples in late September.",
    "He left the map under the third stone.",
    "Move the meeting to Thursday at half past nine.",
    "Snow closed the mountain pass last night.",
    "Label each jar with the date and contents.",
    "The museum opens a new exhibit next spring.",
    "Backups run nightly at 2 am server time.",
    "Feed the cat twice and water the ferns.",
    "All hands on deck for the morning briefing.",
    "The bridge toll rises to 4 dollars in May.",
    "Measure twice and cut once.",
    "Gather at the harbor when the bells ring.",
    "The recipe calls for six eggs and honey.",
    "Her flight lands at gate 22 around dusk.",
    "Quiet voices carry far across still water.",
    "Zinc and copper make a simple battery cell.",
};

bool valid_utf8(const std::string& s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t extra = 0;
    if (c < 0x80) extra = 0;
    else if ((c & 0xE0) == 0xC0 && c >= 0xC2) extra = 1;
    else if ((c & 0xF0) == 0xE0) extra = 2;
    else if ((c & 0xF8) == 0xF0 && c <= 0xF4) extra = 3;
    else return false;
    if (i + extra >= s.size() && extra > 0) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return false;
    }
    i += extra + 1;
  }
  return true;
}

cipher::KeyMaterial fixed_key(cipher::CipherMethod method) {
  switch (method) {
    case cipher::CipherMethod::Caesar: return cipher::CaesarKey{3};
    case cipher::CipherMethod::Vigenere: return cipher::VigenereKey{"LEMON"};
    case cipher::CipherMethod::Atbash: return cipher::AtbashKey{};
    case cipher::CipherMethod::Playfair: return cipher::PlayfairKey{"MONARCHY"};
    case cipher::CipherMethod::RailFence: return cipher::RailFenceKey{3};
  }
  return cipher::CaesarKey{3};
}

}  // namespace

const std::vector<std::string>& builtin_corpus() { return kBuiltin; }

std::vector<std::string> load_corpus(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw CorpusError("cannot open corpus file " + file.string());
  const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw CorpusError("failed reading corpus file " + file.string());
  if (!valid_utf8(data)) throw CorpusError("corpus file " + file.string() + " is not valid UTF-8");

  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= data.size()) {
    auto end = data.find('\n', pos);
    if (end == std::string::npos) end = data.size();
    std::string line = data.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const bool blank = line.find_first_not_of(" \t") == std::string::npos;
    if (!blank && line.front() != '#') out.push_back(std::move(line));
    pos = end + 1;
  }
  if (out.empty()) throw CorpusError("corpus file " + file.string() + " has no plaintexts");
  return out;
}

std::vector<PreflightFailure> preflight(const std::vector<std::string>& corpus) {
  std::vector<PreflightFailure> failures;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    for (const auto method : cipher::kAllMethods) {
      try {
        const auto key = fixed_key(method);
        const std::string expected = cipher::canonical_plaintext(method, corpus[i]);
        const std::string back = cipher::decrypt(key, cipher::encrypt(key, corpus[i]));
        if (back != expected) failures.push_back({i, method, "round trip mismatch"});
      } catch (const Error& e) {
        failures.push_back({i, method, e.what()});
      }
    }
  }
  return failures;
}

void require_preflight(const std::vector<std::string>& corpus) {
  if (corpus.empty()) throw CorpusError("corpus is empty");
  const auto failures = preflight(corpus);
  if (failures.empty()) return;
  const auto& f = failures.front();
  throw CorpusError("corpus entry " + std::to_string(f.index + 1) + " fails the " +
                    std::string(cipher::method_id(f.method)) + " round trip: " + f.detail +
                    " (" + std::to_string(failures.size()) + " failures in total)");
}

}  // namespace cipherflow::harness
