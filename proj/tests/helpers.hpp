#pragma once

#include "engage/config.hpp"
#include "engage/textfeat.hpp"
#include "engage/topics.hpp"

#include <filesystem>
#include <random>
#include <string>

namespace test_support {

inline std::filesystem::path data_dir()
{
    return ENGAGE_TEST_DATA_DIR;
}

inline engage::LexiconPaths shipped_paths()
{
    auto d = data_dir();
    return {d / "topic_lexicon.csv", d / "valence.tsv", d / "subjectivity.tsv", d / "concreteness.tsv",
            d / "easy_words.txt"};
}

inline const engage::Lexicons& shipped_lexicons()
{
    static const engage::Lexicons lex = engage::load_lexicons(shipped_paths());
    return lex;
}

inline const engage::TopicLexicon& shipped_topics()
{
    static const engage::TopicLexicon t = engage::load_topic_lexicon_file(shipped_paths().topics.string());
    return t;
}

// Fresh scratch directory under the test working directory.
inline std::filesystem::path scratch_dir(const std::string& name)
{
    auto p = std::filesystem::current_path() / "scratch" / name;
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace test_support
