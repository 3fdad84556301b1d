#include "lexdiv/sentiment.hpp"

namespace lexdiv::sentiment {

namespace {

// Subset of the published lexicon (MIT licensed, see data/LICENSE.vader.txt).
constexpr std::pair<const char*, double> kMiniLexicon[] = {
    {"good", 1.9}, {"great", 3.1}, {"bad", -2.5}, {"terrible", -2.1}, {"awful", -2.0},
    {"love", 3.2}, {"hate", -2.7}, {"like", 1.5}, {"happy", 2.7}, {"sad", -2.1}, {"angry", -2.3},
    {"excellent", 2.7}, {"wonderful", 2.7}, {"amazing", 2.8}, {"horrible", -2.5}, {"best", 3.2},
    {"worst", -3.1}, {"nice", 1.8}, {"fine", 0.8}, {"beautiful", 2.9}, {"ugly", -2.3}, {"fun", 2.3},
    {"funny", 1.9}, {"boring", -1.3}, {"win", 2.8}, {"lose", -1.7}, {"winning", 2.4},
    {"lost", -1.3}, {"loss", -1.3}, {"defeat", -2.0}, {"strong", 2.3}, {"weak", -1.9},
    {"free", 2.3}, {"safe", 1.9}, {"danger", -2.4}, {"dangerous", -2.1}, {"kill", -3.7},
    {"killed", -3.5}, {"death", -2.9}, {"dead", -3.3}, {"die", -2.9}, {"hurt", -2.4},
    {"pain", -2.3}, {"painful", -1.9}, {"hope", 1.9}, {"hopeful", 2.3}, {"fear", -2.2},
    {"scared", -1.9}, {"worry", -1.9}, {"worried", -1.2}, {"trust", 2.3}, {"true", 1.8},
    {"fake", -2.1}, {"liar", -2.3}, {"lies", -1.8}, {"crime", -2.5}, {"criminal", -2.4},
    {"fraud", -2.8}, {"thank", 1.5}, {"thanks", 1.9}, {"grateful", 2.0}, {"glad", 2.0},
    {"proud", 2.1}, {"shame", -2.1}, {"ashamed", -2.1}, {"disgrace", -2.2}, {"disgusting", -2.4},
    {"evil", -3.4}, {"wrong", -2.1}, {"support", 1.7}, {"supported", 1.3}, {"protect", 1.6},
    {"protected", 1.9}, {"attack", -2.1}, {"attacked", -2.0}, {"threat", -2.4}, {"threats", -1.8},
    {"war", -2.9}, {"peace", 2.5}, {"violence", -3.1}, {"violent", -2.9}, {"care", 2.2},
    {"caring", 2.2}, {"kind", 2.4}, {"kindness", 2.0}, {"cruel", -2.8}, {"help", 1.7},
    {"helpful", 1.8}, {"harm", -2.5}, {"disaster", -3.1}, {"crisis", -3.1}, {"problem", -1.7},
    {"problems", -1.7}, {"fail", -2.5}, {"failed", -2.3}, {"failure", -2.3}, {"success", 2.7},
    {"successful", 2.8}, {"perfect", 2.7}, {"pretty", 2.2}, {"smart", 1.7}, {"stupid", -2.4},
    {"idiot", -2.3}, {"dumb", -2.3}, {"crazy", -1.4}, {"insane", -1.7}, {"sick", -2.3},
    {"healthy", 1.7}, {"enjoy", 2.2}, {"enjoyed", 2.3}, {"welcome", 2.0}, {"celebrate", 2.7},
    {"congrats", 2.4}, {"congratulations", 2.9}, {"awesome", 3.1}, {"cool", 1.3}, {"okay", 0.9},
    {"ok", 1.2}, {"yes", 1.7}, {"no", -1.2}, {"sorry", -0.3}, {"please", 1.3}, {"excited", 1.4},
    {"exciting", 2.2}, {"inspiring", 1.8}, {"inspired", 2.2}, {"brave", 2.4}, {"hero", 2.6},
    {"heroes", 2.3}, {"honor", 2.2}, {"honored", 2.8}, {"respect", 2.1}, {"respected", 2.1},
    {"disrespect", -1.8}, {"justice", 2.4}, {"injustice", -2.7}, {"fair", 1.3}, {"unfair", -2.1},
    {"freedom", 3.2}, {"liberty", 2.4}, {"lol", 1.8}, {"haha", 2.0}, {"wow", 2.8}, {"yay", 2.4},
    {"ugh", -1.8}, {"damn", -1.7}, {"hell", -3.6}, {"shit", -2.6}, {"fuck", -2.5}, {"crap", -1.6},
    {":)", 2.0}, {":(", -1.9}, {";)", 0.9}, {":D", 2.3}, {":/", -1.4}, {"<3", 1.9}, {":-)", 1.3},
    {":-(", -1.5}, {":P", 1.4}, {"sweet", 2.0}, {"delicious", 2.7}, {"yummy", 2.4}, {"fresh", 1.3},
    {"calm", 1.3}, {"peaceful", 2.2}, {"chaos", -2.7}, {"mess", -1.5}, {"broken", -2.1},
    {"destroy", -2.5}, {"destroyed", -2.2}, {"ruin", -2.8}, {"ruined", -2.1}, {"save", 2.2},
    {"saved", 1.8}, {"rescue", 2.3}, {"poor", -2.1}, {"rich", 2.6}, {"wealthy", 1.5},
    {"greed", -1.7}, {"greedy", -1.3}, {"lazy", -1.5}, {"hard", -0.4}, {"easy", 1.9},
    {"difficult", -1.5}, {"agree", 1.5}, {"disagree", -1.6}, {"fight", -1.6}, {"fighting", -1.5},
    {"battle", -1.6}, {"enemy", -2.5}, {"enemies", -2.2}, {"friend", 2.2}, {"friends", 2.1},
    {"loving", 2.9}, {"blessed", 2.9}, {"bless", 1.8}, {"blessing", 2.2}, {"pray", 1.3},
    {"god", 1.1}, {"heaven", 2.3}, {"outrage", -2.3}, {"outrageous", -2.0}, {"shocking", -1.7},
    {"shocked", -1.3}, {"sadly", -1.8}, {"tragic", -2.0}, {"tragedy", -3.4}, {"positive", 2.6},
    {"negative", -2.7}, {"important", 0.8}, {"interesting", 1.7}, {"useless", -1.8},
    {"worthless", -1.9},
};

}  // namespace

SentimentConfig SentimentConfig::builtin() {
  SentimentConfig cfg;
  for (const auto& [token, valence] : kMiniLexicon) cfg.lexicon.emplace(token, valence);
  cfg.boosters = default_boosters(cfg.booster_increment);
  cfg.negations = default_negations();
  return cfg;
}

}  // namespace lexdiv::sentiment
