"""Printed coefficients of the order 2-4 IMEX DIMSIMs.

Only c, A, A*, U and V are tabulated; B and B* are rebuilt from them.
Matrices are stored as strings so they can be read as exact decimals.
The U arrays are listed in their mathematical (unit lower triangular)
orientation.
"""

APPENDIX = {
    "DIMSIM2A": {
        "c": ["0.5207015987954746", "1"],
        "A": [
            ["0", "0"],
            ["0.6335780271090006", "0"],
        ],
        "Astar": [
            ["0.9756662942012514", "0"],
            ["1.065344873186484", "0.9756662942012514"],
        ],
        "U": [
            ["1", "0"],
            ["0.8760323181723925", "1"],
        ],
        "V": [
            ["0.8035259425918053", "1.584881273180670"],
            ["0.09961124839144930", "0.1964740574081947"],
        ],
    },
    "DIMSIM2L": {
        "c": ["0.5725000000000000", "1"],
        "A": [
            ["0", "0"],
            ["0.5507246376811594", "0"],
        ],
        "Astar": [
            ["0.4025509997331064", "0"],
            ["0.3054637337141530", "0.4025509997331064"],
        ],
        "U": [
            ["1", "0"],
            ["0.8970000000000000", "1"],
        ],
        "V": [
            ["0.7976747326679189", "1.964322983806612"],
            ["0.08216049746479565", "0.2023252673320811"],
        ],
    },
    "DIMSIM3A": {
        "c": ["0.3785922442536512", "0.7369632894601272", "1"],
        "A": [
            ["0", "0", "0"],
            ["0.6105030326964779", "0", "0"],
            ["0.5054775907409634", "0.3826213150653439", "0"],
        ],
        "Astar": [
            ["0.5023463944444552", "0", "0"],
            ["-0.8899211224523407", "0.5023463944444552", "0"],
            ["-3.305290943287502", "0.4193402392399124", "0.5023463944444552"],
        ],
        "U": [
            ["1", "0", "0"],
            ["0.6070215241878391", "1", "0"],
            ["0.5361152778084712", "1.091180739129647", "1"],
        ],
        "V": [
            ["0.5418838673478645", "0.9017144383487438", "2.958352027358458"],
            ["0.2129486962575630", "0.3543543656001081", "1.162568670627143"],
            ["0.01900613148571312", "0.03162689316015439", "0.1037617670520274"],
        ],
    },
    "DIMSIM3L": {
        "c": ["0.4020684033460171", "0.7554528159803609", "1"],
        "A": [
            ["0", "0", "0"],
            ["0.5925366351567699", "0", "0"],
            ["0.5582112117594124", "0.3256969821842126", "0"],
        ],
        "Astar": [
            ["0.5201730949739405", "0", "0"],
            ["-1.082981144838764", "0.5201730949739405", "0"],
            ["-2.860648399647160", "0.2917933416909193", "0.5201730949739405"],
        ],
        "U": [
            ["1", "0", "0"],
            ["0.6343850217261301", "1", "0"],
            ["0.5123644514467803", "1.138668063964801", "1"],
        ],
        "V": [
            ["0.4816666646770200", "0.7031253548332313", "3.663136087971684"],
            ["0.1761045471411361", "0.2570731613311589", "1.339297421217996"],
            ["0.03435316450098294", "0.05014791919551827", "0.2612601739918211"],
        ],
    },
    "DIMSIM4A": {
        "c": [
            "0.2561983471074380",
            "0.4485981308411215",
            "0.7622950819672131",
            "1",
        ],
        "A": [
            ["0", "0", "0", "0"],
            ["0.3245033112582781", "0", "0", "0"],
            ["0.1102941176470588", "0.6486486486486486", "0", "0"],
            ["0.3111111111111111", "0.1603053435114504", "0.4729729729729730", "0"],
        ],
        "Astar": [
            ["1.228571428571429", "0", "0", "0"],
            ["-2.659574468085106", "1.228571428571429", "0", "0"],
            ["-6.431818181818182", "-0.4444444444444444", "1.228571428571429", "0"],
            [
                "-5.931034482758621",
                "-4.906250000000000",
                "1.103448275862069",
                "1.228571428571429",
            ],
        ],
        "U": [
            ["1", "0", "0", "0"],
            ["0.7011494252873563", "1", "0", "0"],
            ["0.2363213391750847", "0.3563218390804598", "1", "0"],
            [
                "0.3704826947154125",
                "0.5083355703606088",
                "0.6222222222222222",
                "1",
            ],
        ],
        "V": [
            [
                "0.3181770223788457",
                "1.319227410800732",
                "0.2619374293792898",
                "1.680623378297797",
            ],
            [
                "0.09508738599827574",
                "0.3942518698944718",
                "0.07828015130875329",
                "0.5022552624798014",
            ],
            [
                "0.2091032901032768",
                "0.8669852710621154",
                "0.1721430978104653",
                "1.104491692074865",
            ],
            [
                "0.02185292729383308",
                "0.09060673356209266",
                "0.01799029847272758",
                "0.1154280099162172",
            ],
        ],
    },
}

# first-order pairs: forward Euler explicit part, one implicit stage at c = 1
EULER_LAMBDA = {"DIMSIM1A": "0.5", "DIMSIM1L": "1"}
