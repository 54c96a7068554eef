// Copyright 2026 The pcil Authors
// SPDX-License-Identifier: Apache-2.0
//
// Recipes for the committed fixtures. make_fixtures writes them; the
// regeneration test checks the committed bytes still match.
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "pcil/feature_store.hpp"
#include "pcil/llm.hpp"
#include "pcil/prompts.hpp"
#include "../support/synth.hpp"

namespace pcil::fixtures {

/// 500 down to 10, geometric over ten classes.
inline std::vector<std::size_t> imbalance_counts() {
  std::vector<std::size_t> counts;
  for (int k = 0; k < 10; ++k) {
    counts.push_back(static_cast<std::size_t>(std::lround(500.0 * std::pow(50.0, -k / 9.0))));
  }
  return counts;
}

inline testing::Mixture imbalance_mixture() {
  return testing::make_mixture(16, 10, 1.0, 9.0, 0x1a7b);
}

inline FeatureDataset imbalance_train() {
  return testing::shuffled(testing::sample(imbalance_mixture(), imbalance_counts(), 11), 12);
}

inline FeatureDataset imbalance_test() {
  return testing::sample(imbalance_mixture(), std::vector<std::size_t>(10, 100), 13,
                         SplitTag::kTest);
}

inline FeatureDataset lda_small() {
  const auto m = testing::make_mixture(4, 3, 2.0, 4.0, 0x1da);
  return testing::shuffled(testing::sample(m, {20, 20, 20}, 21), 22);
}

/// K = 20, L = 32; class ids start at 100 to catch index/id mix-ups.
inline testing::Mixture harness_mixture() { return testing::make_mixture(32, 20, 1.5, 1.0, 0x4a5); }

inline FeatureDataset harness_train() {
  auto ds = testing::shuffled(
      testing::sample(harness_mixture(), std::vector<std::size_t>(20, 40), 31, SplitTag::kTrain, 100),
      32);
  for (ClassId c = 100; c < 120; ++c) ds.set_class_name(c, "species_" + std::to_string(c));
  return ds;
}

inline FeatureDataset harness_test() {
  auto ds = testing::sample(harness_mixture(), std::vector<std::size_t>(20, 15), 33,
                            SplitTag::kTest, 100);
  for (ClassId c = 100; c < 120; ++c) ds.set_class_name(c, "species_" + std::to_string(c));
  return ds;
}

/// One record per class: the true mixture means, for the zero-shot learner.
inline FeatureDataset harness_prototypes() {
  const auto m = harness_mixture();
  FeatureDataset ds(32, SplitTag::kTrain);
  std::vector<float> row(32);
  for (Eigen::Index k = 0; k < m.means.cols(); ++k) {
    for (Eigen::Index j = 0; j < 32; ++j) row[static_cast<std::size_t>(j)] = static_cast<float>(m.means(j, k));
    ds.add(100 + static_cast<ClassId>(k), row);
  }
  return ds;
}

inline RealmSpec birds_realm() { return {"Birds", RealmKind::kBiological, "orders", ""}; }

inline const char* kBirdOrders = "1. Psittaciformes\n2. Strigiformes\n3. Piciformes\n";

inline const char* kPsittaciformes = R"(1; Ara macao; Scarlet Macaw; Large red macaw with yellow and blue wing bands, a bare white face patch and a long pointed red tail.
2; Ara ararauna; Blue-and-yellow Macaw; Turquoise blue back and wings, golden yellow underparts, white face with thin black lines and a black throat.
3; Anodorhynchus hyacinthinus; Hyacinth Macaw; Very large all cobalt blue parrot with a huge black bill and bright yellow bare skin around the eye and bill base.
4; Cacatua galerita; Sulphur-crested Cockatoo; White cockatoo with an erectile yellow crest, dark grey bill and yellow wash under the wings and tail.
5; Eolophus roseicapilla; Galah; Pink face and underparts, pale pink crown, soft grey back and wings and a pale horn coloured bill.
6; Nymphicus hollandicus; Cockatiel; Slender grey parrot with a tall upright crest, yellow face, round orange cheek patch and white wing flash.
7; Melopsittacus undulatus; Budgerigar; Small green parakeet with yellow face, black scalloped barring on the back and a long tapered blue tail.
8; Psittacus erithacus; Grey Parrot; Medium ash grey parrot with scalloped paler head feathers, white bare face and a short bright red tail.
9; Amazona aestiva; Turquoise-fronted Amazon; Stocky green parrot with turquoise forehead, yellow face and red shoulder patch on a dark bill.
10; Pionus menstruus; Blue-headed Parrot; Green body with a vivid blue head and neck, black ear patch, red undertail coverts and a dark bill with red base.
11; Eclectus roratus; Eclectus Parrot; Male bright green with orange upper bill, female deep red with blue belly band and black bill.
12; Trichoglossus moluccanus; Rainbow Lorikeet; Blue head, orange red breast, green wings and back, yellow green collar and a red bill.
13; Agapornis roseicollis; Rosy-faced Lovebird; Small chunky green parrot with a rosy pink face and throat, blue rump and horn coloured bill.
14; Myiopsitta monachus; Monk Parakeet; Bright green parakeet with a pale grey forehead, throat and barred grey breast and a long green tail.
15; Psittacula krameri; Rose-ringed Parakeet; Slim lime green parakeet with a red hooked bill, long tail and in males a black and rose neck ring.
16; Strigops habroptilus; Kākāpō; Large flightless moss green parrot mottled with black and yellow, owl like facial disc and pale bill.
17; Nestor notabilis; Kea; Olive green mountain parrot with dark feather edging, long narrow curved grey bill and orange red underwings.
18; Probosciger aterrimus; Palm Cockatoo; Large smoky black cockatoo with a tall ragged crest, massive black bill and bare red cheek patch.
19; Forpus coelestis; Pacific Parrotlet; Tiny green parrot with a short tail, pale bill and in males a bright blue streak behind the eye.
20; Calyptorhynchus banksii; Red-tailed Black Cockatoo; Glossy black cockatoo with a rounded crest and broad scarlet panels across the tail in males.
)";

inline const char* kStrigiformes = R"(**1; Tyto alba; Barn Owl; Pale owl with a white heart shaped facial disc, golden buff and grey upperparts and white underparts.**
2; Bubo bubo; Eurasian Eagle-Owl; Very large tawny owl with prominent ear tufts, deep orange eyes and heavy dark streaks on the breast.
3; Bubo virginianus; Great Horned Owl; Large bulky owl with wide set ear tufts, yellow eyes, a white throat patch and fine barring below.
4; Bubo scandiacus; Snowy Owl; Large white owl with rounded head, yellow eyes and variable dark spotting or barring, heaviest in females.
5; Strix aluco; Tawny Owl; Round headed brown or grey owl without ear tufts, dark eyes and a pale facial disc with darker rim.
6; Strix varia; Barred Owl; Grey brown owl with dark eyes, barred throat and vertical brown streaks on a pale belly.
7; Strix nebulosa; Great Grey Owl; Huge grey owl with a large concentric ringed facial disc, small yellow eyes and a white bow tie pattern.
8; Athene noctua; Little Owl; Small squat brown owl spotted with white, flat head, pale eyebrows and bright yellow eyes.
9; Athene cunicularia; Burrowing Owl; Small long legged sandy brown owl with white spots, white brows and chin, often standing on the ground.
10; Asio otus; Long-eared Owl; Slender brown owl with long close set ear tufts, orange facial disc and bold streaking on buff underparts.
11; Asio flammeus; Short-eared Owl; Buff owl with tiny ear tufts, yellow eyes set in black patches and long wings with dark wrist marks.
12; Otus scops; Eurasian Scops Owl; Tiny grey brown owl with small ear tufts, yellow eyes and bark like streaked and vermiculated plumage.
13; Megascops asio; Eastern Screech Owl; Small owl in grey or rufous morph with short ear tufts, yellow eyes and bark patterned plumage.
14; Glaucidium passerinum; Eurasian Pygmy Owl; Tiny owl with a small round head, yellow eyes, short white brows and a brown back spotted with white.
15; Aegolius acadicus; Northern Saw-whet Owl; Small owl with large round head, white facial disc, yellow eyes and brown streaks on white underparts.
16; Aegolius funereus; Boreal Owl; Small owl with a square pale facial disc framed in black, yellow eyes and white spotted chocolate back.
17; Surnia ulula; Northern Hawk-Owl; Long tailed owl with hawk like shape, white face framed by black bars and finely barred underparts.
18; Ninox novaeseelandiae; Morepork; Small dark brown owl with yellow eyes, pale eyebrows and buff spotted and streaked underparts.
19; Ketupa ketupu; Buffy Fish Owl; Buff brown owl with long horizontal ear tufts, bright yellow eyes and dark streaks on buff underparts.
20; Pulsatrix perspicillata; Spectacled Owl; Dark brown owl with bold white spectacles around yellow eyes, a brown breast band and plain buff belly.
Note: The Strigiformes order only contains these 20 species.
)";

inline const char* kPiciformes = R"(1. Dryocopus pileatus; Pileated Woodpecker; Crow sized black woodpecker with a flaming red crest, white stripe down the neck and white underwings.
2. Dryocopus martius; Black Woodpecker; Large all black woodpecker with a pale ivory bill and a red crown, covering the whole crown in males.
3. Dendrocopos major; Great Spotted Woodpecker; Black and white pied woodpecker with large white shoulder patches and bright red undertail.
4. Picus viridis; European Green Woodpecker; Large green woodpecker with a yellow rump, red crown and black mask around a pale eye.
5. Colaptes auratus; Northern Flicker; Brown barred woodpecker with black bib, spotted underparts and yellow or red underwing shafts.
6. Melanerpes formicivorus; Acorn Woodpecker; Clown faced black and white woodpecker with a red cap, white eyes and a glossy black back.
7. Melanerpes erythrocephalus; Red-headed Woodpecker; Entirely crimson head, black back and large square white wing patches on white underparts.
8. Sphyrapicus varius; Yellow-bellied Sapsucker; Black and white woodpecker with red forehead, a long white wing stripe and yellow washed belly.
9. Dryobates pubescens; Downy Woodpecker; Tiny black and white woodpecker with a short bill, white back stripe and a small red nape patch on males.
10. Campephilus principalis; Ivory-billed Woodpecker; Very large black woodpecker with a large ivory bill, white wing panels and a pointed crest.
11. Ramphastos toco; Toco Toucan; Black toucan with a huge orange bill tipped black, white throat and blue skin around the eye.
12. Ramphastos sulfuratus; Keel-billed Toucan; Black toucan with a yellow chest and a huge rainbow bill of green, blue, orange and red.
13. Pteroglossus torquatus; Collared Aracari; Slim toucan with a black head, yellow underparts crossed by a red and black band and a pale patterned bill.
14. Selenidera maculirostris; Spot-billed Toucanet; Small toucan with a pale bill marked with dark bars and in males a black head and yellow ear patch.
15. Psilopogon haemacephalus; Coppersmith Barbet; Small green barbet with a crimson forehead and breast patch, yellow face and streaked belly.
16. Trachyphonus darnaudii; "D'Arnaud's Barbet"; Spotted brown and yellow barbet with a black crown speckled with yellow and a red vent.
17. Indicator indicator; Greater Honeyguide; Plain grey brown bird with pink bill in males, a black throat and white cheek patch.
18. Galbula ruficauda; Rufous-tailed Jacamar; Iridescent green bird with a long thin dagger bill, rufous belly and long tapered tail.
19. Bucco capensis; Collared Puffbird; Big headed rufous bird with a black breast band, orange bill and orange eyes.
20. Jynx torquilla; Eurasian Wryneck; Cryptic grey brown bird with intricate bark like barring and a dark stripe down the nape and back.
21. Picoides tridactylus; Eurasian Three-toed Woodpecker;
)";

/// Transcript answering every prompt of a Birds discovery run.
inline std::vector<TranscriptEntry> birds_transcript() {
  const auto realm = birds_realm();
  std::vector<TranscriptEntry> out;
  const auto first = subtype_chat(realm);
  out.push_back({first.system, first.user, kBirdOrders});
  const std::pair<const char*, const char*> orders[] = {
      {"Psittaciformes", kPsittaciformes}, {"Strigiformes", kStrigiformes}, {"Piciformes", kPiciformes}};
  for (const auto& [order, response] : orders) {
    const auto chat = render_description_system_prompt(realm, order);
    out.push_back({chat.system, chat.user, response});
  }
  return out;
}

}  // namespace pcil::fixtures
