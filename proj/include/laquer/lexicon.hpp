#pragma once

// Embedded English lexical data: the stopword list used for every
// content-word count, and a suffix-rule lemmatizer with an exception table.
//
// The stopword list is the 179-word English list distributed with NLTK,
// reproduced verbatim below.

#include <algorithm>
#include <array>
#include <cctype>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

namespace laquer {

inline constexpr std::array<std::string_view, 179> kStopwords = {
    "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "you're", "you've", "you'll", "you'd",
    "your", "yours", "yourself", "yourselves", "he", "him", "his", "himself", "she", "she's", "her", "hers",
    "herself", "it", "it's", "its", "itself", "they", "them", "their", "theirs", "themselves", "what", "which",
    "who", "whom", "this", "that", "that'll", "these", "those", "am", "is", "are", "was", "were", "be", "been",
    "being", "have", "has", "had", "having", "do", "does", "did", "doing", "a", "an", "the", "and", "but", "if",
    "or", "because", "as", "until", "while", "of", "at", "by", "for", "with", "about", "against", "between",
    "into", "through", "during", "before", "after", "above", "below", "to", "from", "up", "down", "in", "out",
    "on", "off", "over", "under", "again", "further", "then", "once", "here", "there", "when", "where", "why",
    "how", "all", "any", "both", "each", "few", "more", "most", "other", "some", "such", "no", "nor", "not",
    "only", "own", "same", "so", "than", "too", "very", "s", "t", "can", "will", "just", "don", "don't",
    "should", "should've", "now", "d", "ll", "m", "o", "re", "ve", "y", "ain", "aren", "aren't", "couldn",
    "couldn't", "didn", "didn't", "doesn", "doesn't", "hadn", "hadn't", "hasn", "hasn't", "haven", "haven't",
    "isn", "isn't", "ma", "mightn", "mightn't", "mustn", "mustn't", "needn", "needn't", "shan", "shan't",
    "shouldn", "shouldn't", "wasn", "wasn't", "weren", "weren't", "won", "won't", "wouldn", "wouldn't"};

inline bool is_stopword(std::string_view lower_word) {
  static const std::unordered_set<std::string_view> set(kStopwords.begin(), kStopwords.end());
  return set.count(lower_word) > 0;
}

/// Maps a lowercased word to its lemma. Implementations must be pure.
class Lemmatizer {
 public:
  virtual ~Lemmatizer() = default;
  virtual std::string lemma(std::string_view lower_word) const = 0;
};

/// Suffix rules for regular plural and verb inflection, backed by an
/// exception table for irregular forms and for -ing nouns.
class RuleLemmatizer final : public Lemmatizer {
 public:
  std::string lemma(std::string_view w) const override {
    const auto& ex = exceptions();
    if (auto it = ex.find(std::string(w)); it != ex.end()) return it->second;
    if (!std::all_of(w.begin(), w.end(), [](char c) { return c >= 'a' && c <= 'z'; })) return std::string(w);
    if (w.size() <= 3) return std::string(w);
    std::string s(w);
    if (ends_with(s, "ies") && s.size() > 4) return s.substr(0, s.size() - 3) + "y";
    if (ends_with(s, "sses")) return s.substr(0, s.size() - 2);
    if (ends_with(s, "ches") || ends_with(s, "shes") || ends_with(s, "xes") || ends_with(s, "zzes")) {
      return s.substr(0, s.size() - 2);
    }
    if (ends_with(s, "s")) {
      if (ends_with(s, "ss") || ends_with(s, "us") || ends_with(s, "is") || ends_with(s, "'s")) return s;
      return s.substr(0, s.size() - 1);
    }
    if (ends_with(s, "ing") && s.size() >= 5) {
      const std::string stem = s.substr(0, s.size() - 3);
      if (has_vowel(stem)) return restore(stem);
      return s;
    }
    if (ends_with(s, "ied") && s.size() > 4) return s.substr(0, s.size() - 3) + "y";
    if (ends_with(s, "ed") && s.size() >= 4) {
      const std::string stem = s.substr(0, s.size() - 2);
      if (has_vowel(stem)) return restore(stem);
      return s;
    }
    return s;
  }

 private:
  static bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
  }
  static bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }
  static bool has_vowel(std::string_view s) {
    return std::any_of(s.begin(), s.end(), [](char c) { return is_vowel(c) || c == 'y'; });
  }

  // Rebuilds a base form from a stem left after removing -ing / -ed.
  static std::string restore(std::string stem) {
    const std::size_t n = stem.size();
    const char last = stem[n - 1];
    if (n >= 3 && stem[n - 2] == last && !is_vowel(last) && last != 'l' && last != 's' && last != 'z') {
      stem.pop_back();
      return stem;
    }
    if (last == 'e' || last == 'y' || last == 'w' || last == 'x') return stem;
    if (last == 'v' || last == 'c' || (last == 'z' && stem[n - 2] != 'z')) return stem + "e";
    if (n >= 2 && last == 'l' && !is_vowel(stem[n - 2]) && stem[n - 2] != 'l') return stem + "e";
    if (n >= 2 && last == 'g' && stem[n - 2] == 'd') return stem + "e";
    if (n >= 5 && last == 'g' && is_vowel(stem[n - 2]) && !is_vowel(stem[n - 3])) return stem + "e";
    if (n == 2 && is_vowel(stem[0]) && !is_vowel(stem[1])) return stem + "e";
    if (n >= 3 && !is_vowel(last) && is_vowel(stem[n - 2]) && !is_vowel(stem[n - 3]) && stem[n - 3] != 'y') {
      if (n >= 5) {
        static constexpr std::array<std::string_view, 9> unstressed = {"en", "er", "on", "it", "et",
                                                                        "ol", "al", "el", "or"};
        const std::string_view tail = std::string_view(stem).substr(n - 2);
        if (std::find(unstressed.begin(), unstressed.end(), tail) != unstressed.end()) return stem;
      }
      return stem + "e";
    }
    return stem;
  }

  static const std::unordered_map<std::string, std::string>& exceptions() {
    static const std::unordered_map<std::string, std::string> table = [] {
      std::unordered_map<std::string, std::string> t;
      const auto add = [&](std::string_view lemma, std::initializer_list<std::string_view> forms) {
        for (auto f : forms) t.emplace(std::string(f), std::string(lemma));
      };
      // Auxiliaries and clitics.
      add("be", {"am", "is", "are", "was", "were", "been", "being", "'m", "'re"});
      add("have", {"has", "had", "having", "'ve"});
      add("do", {"does", "did", "done", "doing"});
      add("not", {"n't"});
      add("can", {"ca"});
      add("will", {"wo", "'ll"});
      add("go", {"goes", "went", "gone", "going"});
      // Irregular verbs.
      add("make", {"made"});
      add("say", {"said"});
      add("take", {"took", "taken"});
      add("come", {"came"});
      add("see", {"saw", "seen"});
      add("give", {"gave", "given"});
      add("get", {"got", "gotten"});
      add("find", {"found"});
      add("think", {"thought"});
      add("tell", {"told"});
      add("become", {"became"});
      add("begin", {"began", "begun"});
      add("keep", {"kept"});
      add("hold", {"held"});
      add("withhold", {"withheld"});
      add("bring", {"brought"});
      add("buy", {"bought"});
      add("leave", {"left"});
      add("feel", {"felt"});
      add("mean", {"meant"});
      add("lead", {"led"});
      add("run", {"ran"});
      add("sit", {"sat"});
      add("stand", {"stood"});
      add("understand", {"understood"});
      add("lose", {"lost"});
      add("pay", {"paid"});
      add("lay", {"laid"});
      add("meet", {"met"});
      add("send", {"sent"});
      add("build", {"built"});
      add("spend", {"spent"});
      add("fall", {"fell", "fallen"});
      add("write", {"wrote", "written"});
      add("eat", {"ate", "eaten"});
      add("drive", {"drove", "driven"});
      add("rise", {"rose", "risen"});
      add("arise", {"arose", "arisen"});
      add("choose", {"chose", "chosen"});
      add("speak", {"spoke", "spoken"});
      add("break", {"broke", "broken"});
      add("win", {"won"});
      add("know", {"knew", "known"});
      add("grow", {"grew", "grown"});
      add("throw", {"threw", "thrown"});
      add("draw", {"drew", "drawn"});
      add("show", {"shown"});
      add("fly", {"flew", "flown"});
      add("forget", {"forgot", "forgotten"});
      add("sell", {"sold"});
      add("hear", {"heard"});
      add("strike", {"struck"});
      add("catch", {"caught"});
      add("teach", {"taught"});
      add("fight", {"fought"});
      add("seek", {"sought"});
      add("hide", {"hid", "hidden"});
      add("shoot", {"shot"});
      add("hang", {"hung"});
      add("deal", {"dealt"});
      add("sleep", {"slept"});
      add("dig", {"dug"});
      add("stick", {"stuck"});
      add("shake", {"shook", "shaken"});
      add("wake", {"woke", "woken"});
      add("wear", {"wore", "worn"});
      add("tear", {"tore", "torn"});
      add("freeze", {"froze", "frozen"});
      add("steal", {"stole", "stolen"});
      add("ride", {"rode", "ridden"});
      add("bite", {"bitten"});
      add("die", {"dying", "died", "dies"});
      add("lie", {"lying", "lied", "lies"});
      add("tie", {"tying", "tied", "ties"});
      add("agree", {"agreed", "agreeing"});
      add("free", {"freed"});
      add("guarantee", {"guaranteed"});
      add("change", {"changing", "changed"});
      add("arrange", {"arranging", "arranged"});
      add("challenge", {"challenging", "challenged"});
      add("exchange", {"exchanging", "exchanged"});
      add("range", {"ranging", "ranged"});
      add("control", {"controlling", "controlled"});
      add("patrol", {"patrolling", "patrolled"});
      add("mirror", {"mirroring", "mirrored"});
      add("invite", {"inviting", "invited"});
      add("excite", {"exciting", "excited"});
      add("unite", {"uniting", "united"});
      add("cite", {"citing", "cited"});
      add("compete", {"competing", "competed"});
      add("complete", {"completing", "completed"});
      add("delete", {"deleting", "deleted"});
      add("explore", {"exploring", "explored"});
      add("ignore", {"ignoring", "ignored"});
      add("restore", {"restoring", "restored"});
      add("store", {"storing", "stored"});
      add("score", {"scoring", "scored"});
      add("interfere", {"interfering", "interfered"});
      add("welcome", {"welcoming", "welcomed"});
      add("postpone", {"postponing", "postponed"});
      // Irregular plurals.
      add("child", {"children"});
      add("man", {"men"});
      add("woman", {"women"});
      add("foot", {"feet"});
      add("tooth", {"teeth"});
      add("mouse", {"mice"});
      add("goose", {"geese"});
      add("datum", {"data"});
      // Words the suffix rules would damage.
      for (std::string_view keep :
           {"news", "series", "species", "always", "perhaps", "sometimes", "towards", "politics", "economics",
            "physics", "mathematics", "ethics", "during", "nothing", "something", "anything", "everything",
            "thing", "morning", "evening", "ceiling", "wedding", "understanding", "meeting", "building",
            "funding", "hearing", "beginning", "feeling", "painting", "setting", "spending", "bed", "red", "need",
            "seed", "feed", "speed", "breed", "greed", "proceed", "succeed", "exceed", "hundred", "sacred",
            "naked", "wicked", "afraid", "kindred", "has", "was", "this", "thus", "yes", "bus", "gas", "plus",
            "whereas", "less", "unless", "alias", "atlas", "canvas", "chaos", "bias", "lens"}) {
        t.emplace(std::string(keep), std::string(keep));
      }
      t["things"] = "thing";
      t["hearings"] = "hearing";
      t["meetings"] = "meeting";
      t["buildings"] = "building";
      t["feelings"] = "feeling";
      return t;
    }();
    return table;
  }
};

inline const Lemmatizer& default_lemmatizer() {
  static const RuleLemmatizer instance;
  return instance;
}

}  // namespace laquer
