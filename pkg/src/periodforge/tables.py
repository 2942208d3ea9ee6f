"""Reference parameter tables: known solutions of each family's period problem.

Values are decimal strings exactly as printed in their source tables, to be
parsed at whatever precision the caller works at.  Three entries have printing
defects (anomalies below); REFERENCE_TABLES keeps the printed reading and
CORRECTIONS overlays the repaired values that instantiation can actually use.
Comparisons against these tables should trust at most PUBLISHED_WORKPREC
digits for the corresponding key.
"""

from __future__ import annotations

REFERENCE_TABLES: dict[str, dict[str, str]] = {
    "type12n_n3": {
        "a1": "2.285961038933710244080888845868402093819165097752044509737631058316706e-8",
        "a2": "4.700161765743336982542669213766119858309585183018657196274538467179463e-8",
        "a3": "1.8595779281711072657603313530500197096259118694486751650227093422254676e-7",
        "a4": "8.2857253960766849565137552322547561615808713846473041900491547350816642e-7",
        "a5": "1.64483174554374477381715594501676269507206942332501684499097006995589289e-6",
        "a6": "0.29631123476736122914822064611314549156840796261984201940888130050637413082836",
        "b": "-1.7178841023135822362953917313799684691657715619679441150357599815555589e-7",
    },
    "type22n_n2": {
        "a1": "5.118542891221798652642273355251580805799073321098417e-6",
        "a2": "0.0001744687895471917861630587848151868981931348764093613294",
        "a3": "0.0006770540205501970816106707175235603341515662352801700384",
        "a4": "0.004015111358975674034026378269907807153705408517804684585",
        "b1": "-7.363798587282465131067428810155361518052633431720441e-6",
        "b2": "-0.0012960627225890954277913786548280534111769290970372587867",
    },
    "type22n1_n2": {
        "a1": "1.1282091063550257501145444399176678106500436342667976627322545312066e-10",
        "a2": "2.5781869298833869544988831073818726093121047370845744173622878810234e-10",
        "a3": ".900758139358089640789491168379401826694000527832225139272436839872e-10",
        "a4": "7.52541415527514364659159051880976488113130329298536909943175937427825e-9",
        "a5": "1.438112750623356054147728184139656280562639183914823161927807185774055e-8",
        "b1": "-6.9941987982384915970848453777676610216381891133676506744108284117738e-10",
        "b2": "-0.23273985175611771673967941242330200456348758144076705224973842104312950984721",
    },
    "type34": {
        "a1": "3.66747800575903677425103971726819961446108179191850037756971821e-13",
        "a2": "4.89087380310819387522892930330873771443676055616341929003886214e-7",
        "a3": "0.00318211770512259922630977395737687258793390635072739312898462",
        "a4": "0.21041046622682408387351752969915050930048434243396933164822570",
        "b1": "-3.6763981621447465442422176420782956888909253713440874550960797e-13",
        "b2": "-5.0663272877810517368694600797246852868580154154927193416664126e-7",
        "b3": "-0.0043212684921210595889322909764690858329621497375325652336019",
    },
    "par4n_n3": {
        "a1": "1e-8",
        "a2": "6.59466639799891609173522939680806465912287592656e-10",
        "a3": "2.8819141384545408367827643626597393050288222347121e-9",
        "a4": "3.60735998980815731901024919668500104506308168185473e-8",
        "a5": "1.878761825242715491218481670214881811480936343264821e-7",
        "a6": "2.1426402472280116243465380603261391940325586550233778e-6",
        "a7": "0.0000110243163935562079386000227676184162016976848299812797",
        "a8": "0.0001264421739541800125239658903777500493236340489674605939",
        "a9": "0.0006510938026150800869477889312146522995109925417645643327",
        "a10": "0.0074648248820113309437057075829391053643379979959846168751",
        "a11": "0.0384368739591947293145536401365037438818643908242723861717",
        "a12": "0.4406917933970048601093374578213703599711406025352476678762",
        "b": "-5.2563e-11",
    },
    "par4n1_n3": {
        "a1": "1.2603845439348093259713619930053323710573936489317015427658147213743e-10",
        "a2": "5.7188763662502975418773254029608668176675750416137360850314932817975e-10",
        "a3": "3.0065145446521360806465978867857772007627628395052e-9",
        "a4": "2.09119588124059854086973668043399235755728326827279e-8",
        "a5": "1.348837690013140059063095058823871025583496552028134e-7",
        "a6": "8.749514178846944238519225290147618975573247272658584e-7",
        "a7": "5.5409028958508360611721956233938345329248266678184738e-6",
        "a8": "0.0000361352083214397670882587515169911541562419402005332588",
        "a9": "0.0002291836892214607884869335205291178203660166494144778651",
        "a10": "0.0014939623494188185087754169019070710247635372346728412282",
        "a11": "0.0094741073875420897186917809009834149987231949356303425964",
        "a12": "0.0617604237670150235055924207337095326652841395655831060664",
        "a13": "0.391664016525045117323374978159891090151625490873177707098",
        "b": "-6.15e-11",
    },
    "par4n2_n3": {
        "a1": "1e-12",
        "a2": "7.07635966315915704873463008934708186711541490233514028221304488204e-12",  # exponent base printed as 12
        "a3": "2.997319810868618257304188415086578680945894001619918412861378473377e-11",
        "a4": "4.2213139787159171905867005999520683792521227137531684223382510698251e-10",
        "a5": "2.1190429251130421258945370091628683438030718065476e-9",
        "a6": "2.70746442164935563862848528189779616546391459708886e-8",
        "a7": "1.344092036272544273074732452702322768518584704777767e-7",
        "a8": "1.7270154143394200845728224769922392130140249814357836e-6",
        "a9": "8.5795767180575296326300138949781821942622640473392949e-6",
        "a10": "0.0001101991510220068176278157452735165345731696998543841768",
        "a11": "0.0005474302296481434262712761793407726101973406407808834894",
        "a12": "0.0070315475004170885785156441329838010580023202190107441296",
        "a13": "0.0349303266765551193911815925592835156330078114457572291206",
        "a14": "0.4486670478785153158695747638211060118775881380465661527055",
        "b": "-5.3210542942436699788474722194e-13",
    },
    "par4n3_n3": {
        "a1": "5e-13",
        "a2": "6.436520914369399010313093473542043713123954908753227224982549961737e-11",
        "a3": "4.1421218392560424305384662879094426374509776161115104210650197583147e-10",
        "a4": "1.76403923234234554222669653333257398272696179907630217065265282696619e-9",
        "a5": "1.42857129482822010518047739096784914147305781814065e-8",
        "a6": "5.7900815150262660734080873667253934134780659091523e-8",
        "a7": "4.574845505974320952702888162885640701979832299714309e-7",
        "a8": "1.8624283891741768799964421591262006611337697726417098e-6",
        "a9": "0.0000147497857443538071787049578827677906605487618580117471",
        "a10": "0.0000600208981480012792979575814087503120656942024970255935",
        "a11": "0.0004752444477469941540131623960198059290994726098148511331",
        "a12": "0.0019340274806643505816264587782651208086316182766871696561",
        "a13": "0.0153117850311046495752669687674177658309850492162375720489",
        "a14": "0.0622950460650905819931710051229826193747529336405197641369",
        "a15": "0.4939538285674416552069098964089949833351677249500713975416",
        "b": "-8.96535437397612068858846648391102561934217329894065034481409536834e-12",
    },
}

# Printed values that cannot be literally correct, with the repair used here.
#
# par4n_n3/a1: printed 1e-8, but that breaks the strict ordering a1 < a2
#   (a2 is about 6.6e-10) and the dependent-b closure product; 1e-10 restores
#   both and reproduces the printed b to its full 5 digits.
# par4n2_n3/a2: printed with base 12 in the power (mantissa*12^-12); read as
#   the obvious 10^-12 it sits between a1 = 1e-12 and a3 = 3e-11 as required.
# type22n1_n2/a3: printed .9007...e-10 = 9.007e-11, which is below a2 and
#   breaks the ordering; reading the mantissa as 9.007...e-10 restores it.
#   The repaired value is a guess among several digit-loss repairs, so records
#   built from this table are flagged and not used to certify anything.
CORRECTIONS: dict[str, dict[str, str]] = {
    "par4n_n3": {"a1": "1e-10"},
    "type22n1_n2": {
        "a3": "9.00758139358089640789491168379401826694000527832225139272436839872e-10"
    },
}

ANOMALY_NOTES: dict[str, str] = {
    "par4n_n3": "a1 corrected from printed 1e-8 to 1e-10 (ordering and closure)",
    "par4n2_n3": "a2 exponent base printed as 12, read as 10^-12",
    "type22n1_n2": (
        "a3 printed as 9.007e-11 breaking the ordering; the one-digit exponent "
        "repair to 9.007e-10 restores the ordering but the repaired point still "
        "satisfies no period equation (residual max-norm 0.94), and no one- or "
        "two-entry exponent repair lands on the solution manifold; the genuine "
        "root, reached by continuation from the certified genus-6 sibling "
        "through the extra branch point, has a different scale profile "
        "entirely (cluster at 1e-6, chain-end point at 0.243), so the printed "
        "column reads as output of a corrupted run and the solved table below "
        "replaces it for seeding"
    ),
    "par4n3_n3": (
        "the printed point satisfies no period equation (residual max-norm is "
        "of order 10^2 where every sibling table sits at its root-finder floor); "
        "pinning a15 at the printed value and solving lands within 0.2-2% of "
        "every printed entry except a1, which is off by a factor of 39, so the "
        "table reads as an unconverged iterate carrying roughly two reliable "
        "digits per entry; no digit-level repair exists and the solved table "
        "below replaces it for seeding and certification"
    ),
}

# Solved replacement points, produced by this package's solver where a
# printed table is unusable.  Residual norms are quoted at the listed
# working precision.  Where a pin was needed to square a one-parameter
# family it was chosen to match the printed table where it is healthiest.
SOLVED_TABLES: dict[str, dict[str, str]] = {
    # residual max-norm 7.7e-55 at P=50; square system, no pin
    "type22n1_n2": {
        "a1": "0.0000018531886565847728147705207641236052288630039824297",
        "a2": "0.000011894593934402077648934745639266272335473837187067",
        "a3": "0.000039891277620361006985856413824525504396790983078745",
        "a4": "0.0012196610901109957757484963556224653558009905414539",
        "a5": "0.24340294745692565856905649646806485904591868258030",
        "b1": "-0.0000043565521639992339481278184254390996205711309614683",
        "b2": "-0.00098084165434895570990717825722071261064447742171700",
    },
    # residual max-norm 3.3e-54 at P=50, a15 pinned at the printed value
    "par4n3_n3": {
        "a1": "1.9578330831781683610569232472407159786818e-11",
        "a2": "6.3349764917696882084988281333493530879445e-11",
        "a3": "4.0627287279639698600317614484190968697898e-10",
        "a4": "1.7430904993057169547561458001197572579686e-9",
        "a5": "1.4061989921814221823888736409403409931399e-8",
        "a6": "5.7400467486015208059932346787068235599281e-8",
        "a7": "4.5183948075039639588437632003227549815889e-7",
        "a8": "1.8525969533533227120107430049962404098790e-6",
        "a9": "1.4617012486788930143480921261859454338820e-5",
        "a10": "5.9905910430168901897365236622616344724855e-5",
        "a11": "4.7255321763340556156689731085450943482927e-4",
        "a12": "1.9367766247303945134663970429476241904841e-3",
        "a13": "1.5278116891003040800251659724451852111155e-2",
        "a14": "6.2617675046673196857428122139529291502431e-2",
        "a15": "0.49395382856744163291257949117682606301799",
        "b": "-8.7892780202660905866663676599911445309462e-12",
    },
}

# Working precision (decimal digits) the source solves used; printed digits
# beyond these are not reliable.
PUBLISHED_WORKPREC: dict[str, int] = {
    "type12n_n3": 50,
    "type22n_n2": 30,
    "type22n1_n2": 40,
    "type34": 50,
    "par4n_n3": 20,
    "par4n1_n3": 30,
    "par4n2_n3": 30,
    "par4n3_n3": 30,
}

# Known (a1, a2) solution pairs of the one-parameter genus-2 family with
# dependent b = -a1*a2.
RTW_PAIRS: tuple[tuple[str, str], ...] = (
    ("0.0001", "0.7898850561221615"),
    ("0.1", "0.4677900971198217"),
    ("0.265", "0.270905876788826"),
)


def usable_table(name: str) -> dict[str, str]:
    """The reference table with corrections overlaid."""
    vals = dict(REFERENCE_TABLES[name])
    vals.update(CORRECTIONS.get(name, {}))
    return vals
